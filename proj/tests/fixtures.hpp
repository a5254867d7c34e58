#pragma once

#include <string>

#include "proxid/graph_text.hpp"

// Graphs used across the test suites, in the text format of the parser.
namespace fixtures {

// backdoor triangle
inline const char* kFig1a = R"(
vertex A
vertex C
vertex Y
C -> A
C -> Y
A -> Y
)";

// proximal baseline graph: hidden U with control proxy Z and outcome proxy W
inline const char* kFig1c = R"(
vertex A
vertex Y
vertex C
vertex Z
vertex W
vertex U u
C -> A
C -> Y
A -> Y
U -> A
U -> Y
A -> Z
W -> Y
C -> Z
C -> W
U -> C
U -> W
U -> Z
)";

// front-door DAG with hidden confounder
inline const char* kFig2b = R"(
vertex A
vertex M
vertex Y
vertex C
vertex U u
C -> U
U -> A
U -> Y
C -> A
C -> M
C -> Y
A -> M
M -> Y
)";

// its latent projection
inline const char* kFig2c = R"(
vertex A
vertex M
vertex Y
vertex C
A -> M
M -> Y
C -> A
C -> M
C -> Y
A <-> Y
)";

// front-door with a direct A->Y effect plus proxies (simulation DGP graph).
// The control proxy Z is taken as a cause of the treatment; with the other
// orientation the front-door target is not generically identified.
inline const char* kFig2d = R"(
vertex A
vertex M
vertex Y
vertex C
vertex Z
vertex W
vertex U u
C -> U
U -> A
U -> Y
C -> A
C -> M
C -> Y
A -> M
M -> Y
Z -> A
Z -> M
M -> W
W -> Y
U -> Z
U -> W
C -> W
C -> Z
A -> Y
)";

// one-district projection where nothing is fixable
inline const char* kFig3b = R"(
vertex C
vertex M
vertex A
vertex Y
C -> M
M -> A
A -> Y
M <-> A
C <-> A
C <-> Y
)";

// the two-bridge showcase graph
inline const char* kFig3d = R"(
vertex C
vertex M
vertex A
vertex Y
vertex D
vertex Z
vertex W
vertex X
vertex U u
C -> M
M -> A
A -> Y
U -> M
U -> A
C <-> A
C <-> Y
W -> A
W -> Y
Z -> M
U -> D
U -> W
U -> X
W -> X
X -> Y
U -> Z
D -> M
D -> A
C -> Z
D -> Z
)";

// two-stage proximal g-computation graph
inline const char* kFig4b = R"(
vertex A0
vertex A1
vertex C0
vertex C1
vertex Y
vertex Z0
vertex Z1
vertex W0
vertex W1
vertex U0 u
vertex U1 u
C0 -> A0
C0 -> A1
C0 -> W0
C0 -> Z0
C0 -> C1
C0 -> Y
C0 -> Z1
C0 -> W1
U0 -> A0
U0 -> C1
U0 -> Y
U0 -> W1
U0 -> C0
U0 -> W0
U0 -> Z0
U0 -> U1
U0 -> A1
Z0 -> A0
Z0 -> Z1
Z0 -> A1
W0 -> C1
W0 -> W1
W0 -> Y
A0 -> C1
A0 -> Z1
A0 -> A1
A0 -> Y
A0 -> U1
U1 -> A1
U1 -> Y
U1 -> W1
U1 -> Z1
A1 -> Y
Z1 -> A1
W1 -> Y
C1 -> A1
C1 -> Y
C1 -> Z1
C1 -> W1
)";

// sequentially ignorable two-stage model (policy tests)
inline const char* kFig4a = R"(
vertex A0
vertex A1
vertex C0
vertex C1
vertex Y
vertex U0 u
vertex U1 u
C0 -> A0
A0 -> C1
A0 -> A1
A0 -> Y
C0 -> C1
U0 -> C0
U0 -> C1
U0 -> U1
U1 -> Y
U0 -> Y
C1 -> A1
A1 -> Y
C1 -> Y
C0 -> A1
C0 -> Y
)";

// bow graph: classic non-identified case
inline const char* kBow = R"(
vertex A
vertex Y
A -> Y
A <-> Y
)";

inline proxid::Admg graph(const char* text) { return proxid::parse_graph_text(text); }

}  // namespace fixtures
