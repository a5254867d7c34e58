#include "proxid/table.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace proxid {

std::string join_vars(const VarList& vs, const std::string& sep) {
    std::string out;
    for (const auto& v : vs) {
        if (!out.empty()) out += sep;
        out += v.str();
    }
    return out;
}

Table::Table(VarList axes, std::vector<int> cards) : axes_(std::move(axes)), cards_(std::move(cards)) {
    init_shape();
    data_.assign(data_.size(), 0.0);
}

Table::Table(VarList axes, std::vector<int> cards, std::vector<double> data)
    : axes_(std::move(axes)), cards_(std::move(cards)), data_(std::move(data)) {
    size_t n = data_.size();
    init_shape();
    if (data_.size() != n) throw TableError("table data size mismatch");
}

void Table::init_shape() {
    if (axes_.size() != cards_.size()) throw TableError("axes/cards size mismatch");
    // keep axes sorted; permute cards (and data layout is defined post-sort)
    std::vector<size_t> order(axes_.size());
    for (size_t i = 0; i < order.size(); i++) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return axes_[i] < axes_[j]; });
    bool sorted = true;
    for (size_t i = 0; i < order.size(); i++)
        if (order[i] != i) sorted = false;
    if (!sorted) throw TableError("table axes must be given in sorted order");
    for (size_t i = 0; i + 1 < axes_.size(); i++)
        if (!(axes_[i] < axes_[i + 1])) throw TableError("duplicate table axis " + axes_[i].str());
    size_t n = 1;
    for (int c : cards_) {
        if (c < 1) throw TableError("axis cardinality must be >= 1");
        n *= static_cast<size_t>(c);
    }
    if (data_.empty()) data_.assign(n, 0.0);
    if (data_.size() != n) throw TableError("table data size mismatch");
}

double Table::scalar() const {
    if (!is_scalar()) throw TableError("table is not a scalar");
    return data_[0];
}

int Table::card_of(const Var& v) const {
    for (size_t i = 0; i < axes_.size(); i++)
        if (axes_[i] == v) return cards_[i];
    throw TableError("no axis " + v.str());
}

bool Table::has_axis(const Var& v) const {
    return std::binary_search(axes_.begin(), axes_.end(), v);
}

static size_t flat_index(const std::vector<int>& cards, const std::vector<int>& idx) {
    size_t f = 0;
    for (size_t i = 0; i < cards.size(); i++) f = f * cards[i] + idx[i];
    return f;
}

double& Table::at(const std::vector<int>& idx) { return data_[flat_index(cards_, idx)]; }
double Table::at(const std::vector<int>& idx) const { return data_[flat_index(cards_, idx)]; }

double Table::sum() const {
    double s = 0;
    for (double x : data_) s += x;
    return s;
}

double Table::max_abs() const {
    double m = 0;
    for (double x : data_) m = std::max(m, std::fabs(x));
    return m;
}

void for_each_index(const std::vector<int>& cards,
                    const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(cards.size(), 0);
    while (true) {
        fn(idx);
        int i = static_cast<int>(cards.size()) - 1;
        while (i >= 0) {
            if (++idx[i] < cards[i]) break;
            idx[i] = 0;
            i--;
        }
        if (i < 0) break;
    }
}

namespace {

struct Aligned {
    VarList axes;
    std::vector<int> cards;
    std::vector<size_t> stride_a, stride_b;  // 0 for absent axis
};

Aligned align(const Table& a, const Table& b) {
    Aligned out;
    size_t i = 0, j = 0;
    while (i < a.axes().size() || j < b.axes().size()) {
        bool take_a = j >= b.axes().size() ||
                      (i < a.axes().size() && a.axes()[i] < b.axes()[j]);
        bool take_b = i >= a.axes().size() ||
                      (j < b.axes().size() && b.axes()[j] < a.axes()[i]);
        if (take_a && !take_b) {
            out.axes.push_back(a.axes()[i]);
            out.cards.push_back(a.cards()[i]);
            i++;
        } else if (take_b && !take_a) {
            out.axes.push_back(b.axes()[j]);
            out.cards.push_back(b.cards()[j]);
            j++;
        } else {
            if (a.cards()[i] != b.cards()[j])
                throw TableError("axis cardinality mismatch on " + a.axes()[i].str());
            out.axes.push_back(a.axes()[i]);
            out.cards.push_back(a.cards()[i]);
            i++;
            j++;
        }
    }
    auto strides_for = [&](const Table& t) {
        std::vector<size_t> strides(t.axes().size());
        size_t s = 1;
        for (int k = static_cast<int>(t.axes().size()) - 1; k >= 0; k--) {
            strides[k] = s;
            s *= t.cards()[k];
        }
        std::vector<size_t> out_strides(out.axes.size(), 0);
        size_t ti = 0;
        for (size_t k = 0; k < out.axes.size(); k++) {
            if (ti < t.axes().size() && t.axes()[ti] == out.axes[k]) {
                out_strides[k] = strides[ti];
                ti++;
            }
        }
        return out_strides;
    };
    out.stride_a = strides_for(a);
    out.stride_b = strides_for(b);
    return out;
}

template <typename Op>
Table broadcast(const Table& a, const Table& b, Op op) {
    Aligned al = align(a, b);
    Table out(al.axes, al.cards);
    std::vector<int> idx(al.cards.size(), 0);
    size_t fa = 0, fb = 0, fo = 0;
    size_t total = out.size();
    for (size_t n = 0; n < total; n++) {
        out.data()[fo] = op(a.data()[fa], b.data()[fb], idx);
        fo++;
        int i = static_cast<int>(al.cards.size()) - 1;
        while (i >= 0) {
            idx[i]++;
            fa += al.stride_a[i];
            fb += al.stride_b[i];
            if (idx[i] < al.cards[i]) break;
            fa -= al.stride_a[i] * al.cards[i];
            fb -= al.stride_b[i] * al.cards[i];
            idx[i] = 0;
            i--;
        }
        if (i < 0 && n + 1 < total) throw TableError("broadcast iteration overflow");
    }
    return out;
}

}  // namespace

Table multiply(const Table& a, const Table& b) {
    return broadcast(a, b, [](double x, double y, const std::vector<int>&) { return x * y; });
}

Table add(const Table& a, const Table& b) {
    return broadcast(a, b, [](double x, double y, const std::vector<int>&) { return x + y; });
}

Table divide(const Table& a, const Table& b) {
    Aligned al = align(a, b);
    return broadcast(a, b, [&](double x, double y, const std::vector<int>& idx) {
        if (y == 0.0) {
            if (x == 0.0) return 0.0;
            std::ostringstream msg;
            msg << "division by zero-mass stratum (";
            for (size_t i = 0; i < al.axes.size(); i++)
                msg << (i ? "," : "") << al.axes[i].str() << "=" << idx[i];
            msg << ")";
            throw TableError(msg.str());
        }
        return x / y;
    });
}

Table marginalize(const Table& t, const VarList& out_vars) {
    VarList keep = out_vars;
    std::sort(keep.begin(), keep.end());
    std::vector<int> keep_cards;
    for (const auto& v : keep) keep_cards.push_back(t.card_of(v));
    Table out(keep, keep_cards);
    // strides of kept axes within the output
    std::vector<size_t> out_stride(t.axes().size(), 0);
    {
        std::vector<size_t> strides(keep.size());
        size_t s = 1;
        for (int k = static_cast<int>(keep.size()) - 1; k >= 0; k--) {
            strides[k] = s;
            s *= keep_cards[k];
        }
        for (size_t i = 0; i < t.axes().size(); i++) {
            for (size_t k = 0; k < keep.size(); k++)
                if (keep[k] == t.axes()[i]) out_stride[i] = strides[k];
        }
    }
    std::vector<bool> kept(t.axes().size(), false);
    for (size_t i = 0; i < t.axes().size(); i++)
        kept[i] = std::binary_search(keep.begin(), keep.end(), t.axes()[i]);

    std::vector<int> idx(t.axes().size(), 0);
    size_t fo = 0;
    for (size_t n = 0; n < t.size(); n++) {
        out.data()[fo] += t.data()[n];
        int i = static_cast<int>(t.axes().size()) - 1;
        while (i >= 0) {
            idx[i]++;
            if (kept[i]) fo += out_stride[i];
            if (idx[i] < t.cards()[i]) break;
            if (kept[i]) fo -= out_stride[i] * t.cards()[i];
            idx[i] = 0;
            i--;
        }
        if (i < 0) break;
    }
    return out;
}

Table slice(const Table& t, const Var& v, int index) {
    if (!t.has_axis(v)) throw TableError("slice: no axis " + v.str());
    if (index < 0 || index >= t.card_of(v)) throw TableError("slice index out of range for " + v.str());
    VarList axes;
    std::vector<int> cards;
    size_t pos = 0;
    for (size_t i = 0; i < t.axes().size(); i++) {
        if (t.axes()[i] == v) {
            pos = i;
            continue;
        }
        axes.push_back(t.axes()[i]);
        cards.push_back(t.cards()[i]);
    }
    Table out(axes, cards);
    std::vector<int> idx(t.axes().size(), 0);
    idx[pos] = index;
    size_t fo = 0;
    std::function<void(size_t)> rec = [&](size_t axis) {
        if (axis == t.axes().size()) {
            out.data()[fo++] = t.at(idx);
            return;
        }
        if (axis == pos) {
            rec(axis + 1);
            return;
        }
        for (int k = 0; k < t.cards()[axis]; k++) {
            idx[axis] = k;
            rec(axis + 1);
        }
        idx[axis] = 0;
    };
    rec(0);
    return out;
}

Table relabel(const Table& t, const std::map<Var, Var>& renames) {
    VarList axes;
    for (const auto& a : t.axes()) {
        auto it = renames.find(a);
        axes.push_back(it == renames.end() ? a : it->second);
    }
    std::vector<size_t> order(axes.size());
    for (size_t i = 0; i < order.size(); i++) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return axes[i] < axes[j]; });

    VarList new_axes;
    std::vector<int> new_cards;
    for (size_t k : order) {
        new_axes.push_back(axes[k]);
        new_cards.push_back(t.cards()[k]);
    }
    Table out(new_axes, new_cards);
    std::vector<int> idx(t.axes().size(), 0);
    std::vector<int> oidx(t.axes().size(), 0);
    for (size_t n = 0; n < t.size(); n++) {
        for (size_t k = 0; k < order.size(); k++) oidx[k] = idx[order[k]];
        out.at(oidx) = t.data()[n];
        int i = static_cast<int>(idx.size()) - 1;
        while (i >= 0) {
            if (++idx[i] < t.cards()[i]) break;
            idx[i] = 0;
            i--;
        }
        if (i < 0) break;
    }
    return out;
}

Table conditional_from_joint(const Table& joint, const VarList& vars, const VarList& given) {
    VarList keep = vars;
    keep.insert(keep.end(), given.begin(), given.end());
    Table num = marginalize(joint, keep);
    Table den = marginalize(joint, given);
    return divide(num, den);
}

double max_abs_diff(const Table& a, const Table& b) {
    Table d = add(a, multiply(b, Table(-1.0)));
    return d.max_abs();
}

}  // namespace proxid
