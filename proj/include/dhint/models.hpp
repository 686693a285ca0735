#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dhint/spatial.hpp"
#include "dhint/system.hpp"

namespace dhint {

enum class ModelKind { burgers, kdv, nls };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// u_t = -u u_x - 2 gamma u on the periodic grid.
struct BurgersParams {
    double gamma = 0.25;
    Grid grid{3.14159265358979323846, 80};
};

/// u_t = alpha (u^2)_x + rho u_x + nu u_xxx - 2 gamma u.
struct KdvParams {
    double alpha = -3.0 / 8.0;
    double rho = -10.0;
    double nu = -1e-5;
    double gamma = 1e-2;
    Grid grid{10.0, 248};
    double theta_rho = 0.5;
    double theta_nu = 0.5;
};

enum class NlsPolarizedForm { symmetric, printed };

/// i psi_t = -psi_xx - alpha |psi|^2 psi - i (gamma / 2) psi, state (Re psi; Im psi).
struct NlsParams {
    double alpha = 2.0;
    double gamma = 5e-4;
    Grid grid{25.0, 1024};
    double theta = 1.0;
    NlsPolarizedForm polarized_form = NlsPolarizedForm::symmetric;
};

/// Semidiscrete system -1/2 D1(u.u) - 2 gamma u with H_gen = dx sum u^3 / 6.
/// The reported Hamiltonian is dx sum u^3 / 3.
ConformalModel burgers_model(const BurgersParams& p);

/// Semidiscrete system alpha D1(u.u) + rho D1 u + nu D1 D2 u - 2 gamma u with
/// H = dx sum(alpha/3 u^3 + rho/2 u^2) + nu/2 dx u^T D2 u.
ConformalModel kdv_model(const KdvParams& p);

/// Semidiscrete damped NLS with H = dx sum alpha/4 (u^2+v^2)^2 + dx/2 (u^T D2 u + v^T D2 v).
/// Linearly implicit steps reduce to one complex M x M periodic system.
ConformalModel nls_model(const NlsParams& p);

Vector initial_condition(ModelKind kind, const Grid& grid);

}  // namespace dhint
