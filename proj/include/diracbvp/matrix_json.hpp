#pragma once

#include <nlohmann/json_fwd.hpp>

#include "diracbvp/types.hpp"

// Dense complex matrices travel as {"rows": n, "cols": m, "re": [...], "im": [...]}
// in row-major order.

namespace diracbvp {

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace diracbvp
