#pragma once

namespace hpsim {

/// Numeric tolerances threaded through the whole toolkit.  One record,
/// passed explicitly where it matters; defaults are safe for dimensions
/// up to a few hundred.
struct NumericSettings {
    double eig_tol = 1e-10;     // relative eigendecomposition accuracy
    double tol = 1e-9;          // generic map/matrix equality tolerance
    double gap_tol = 1e-8;      // SDP relative duality gap
    double feas_tol = 1e-8;     // SDP feasibility residuals
    int max_iterations = 200;   // SDP iteration budget
    double kraus_drop_tol = 1e-10;  // relative cutoff for Kraus extraction
    double cert_tol = 1e-6;     // certificate acceptance in the decomposer
};

}  // namespace hpsim
