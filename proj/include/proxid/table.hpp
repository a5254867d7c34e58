#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "proxid/var.hpp"

namespace proxid {

struct TableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense array indexed by a sorted list of Var axes; row-major with the last
// axis fastest. Probability tables, kernels and bridge functions all use it.
class Table {
  public:
    Table() = default;
    explicit Table(double scalar) : data_{scalar} {}
    Table(VarList axes, std::vector<int> cards);
    Table(VarList axes, std::vector<int> cards, std::vector<double> data);

    const VarList& axes() const { return axes_; }
    const std::vector<int>& cards() const { return cards_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }
    bool is_scalar() const { return axes_.empty(); }
    double scalar() const;
    size_t size() const { return data_.size(); }
    int card_of(const Var& v) const;
    bool has_axis(const Var& v) const;

    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;

    double sum() const;
    double max_abs() const;

  private:
    VarList axes_;            // sorted, unique
    std::vector<int> cards_;  // aligned with axes_
    std::vector<double> data_;
    void init_shape();
};

Table multiply(const Table& a, const Table& b);
// Pointwise a/b with broadcasting. Zero denominators raise TableError naming
// the offending stratum unless the numerator is also zero there (0/0 -> 0).
Table divide(const Table& a, const Table& b);
Table add(const Table& a, const Table& b);
Table marginalize(const Table& t, const VarList& out_vars);
Table slice(const Table& t, const Var& v, int index);
Table relabel(const Table& t, const std::map<Var, Var>& renames);
// marginal of t over keep-vars (keep = vars ∪ given), divided by the
// given-margin: a conditional table p(vars | given).
Table conditional_from_joint(const Table& joint, const VarList& vars, const VarList& given);
double max_abs_diff(const Table& a, const Table& b);

// iterate all index tuples of the given cards
void for_each_index(const std::vector<int>& cards,
                    const std::function<void(const std::vector<int>&)>& fn);

}  // namespace proxid
