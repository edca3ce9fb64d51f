#pragma once

#include <stdexcept>
#include <string>

namespace hpsim {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotHermitian : Error {
    explicit NotHermitian(const std::string& msg) : Error(msg) {}
};
struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg) : Error(msg) {}
};
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};
struct NotCP : Error {
    explicit NotCP(const std::string& msg) : Error(msg) {}
};
struct ParamOutOfRange : Error {
    explicit ParamOutOfRange(const std::string& msg) : Error(msg) {}
};
struct InvalidSpec : Error {
    explicit InvalidSpec(const std::string& msg) : Error(msg) {}
};
struct IllPosed : Error {
    explicit IllPosed(const std::string& msg) : Error(msg) {}
};
struct NotHermitianPreserving : Error {
    explicit NotHermitianPreserving(const std::string& msg) : Error(msg) {}
};
struct SolverFailure : Error {
    explicit SolverFailure(const std::string& msg) : Error(msg) {}
};
struct InvalidCertificate : Error {
    explicit InvalidCertificate(const std::string& msg) : Error(msg) {}
};
struct NotDensityMatrix : Error {
    explicit NotDensityMatrix(const std::string& msg) : Error(msg) {}
};
struct IncompleteInstrument : Error {
    explicit IncompleteInstrument(const std::string& msg) : Error(msg) {}
};
struct InfeasibleRecovery : Error {
    explicit InfeasibleRecovery(const std::string& msg) : Error(msg) {}
};

}  // namespace hpsim
