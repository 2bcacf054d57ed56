#pragma once

// For f(x) = x - a x^k + ..., iterates decreasing to 0 satisfy
//   n^(1/(k-1)) u_n -> ((k-1) a)^(-1/(k-1)).

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "fiberdyn/fecld.hpp"
#include "fiberdyn/scalar_fn.hpp"

namespace fiberdyn::jacobsthal {

struct AsymptoticReport {
    double k = 2.0;
    double a = 1.0;
    std::vector<std::size_t> probes;
    std::vector<double> values;  // n^(1/(k-1)) u_n at each probe
    double limit_estimate = 0.0;
    double predicted = 0.0;
    double relative_error = 0.0;
};

/// Thrown with the offending x when 0 < f(x) < x fails on (0, u0] or the
/// sampled slope f(x)/x at x = 1e-4 is not within 1e-3 of 1.
class PreconditionViolated : public PreconditionError {
public:
    PreconditionViolated(const std::string& message, double witness)
        : PreconditionError(message), witness_(witness) {}
    double witness() const noexcept { return witness_; }

private:
    double witness_;
};

double predicted_limit(double k, double a);

AsymptoticReport verify_jacobsthal(const ScalarFn& f, double k, double a, double u0,
                                   std::vector<std::size_t> probes);

/// p_n = n^-(1/(k-1) - delta), with p_0 = 1.
fecld::DecaySequence jacobsthal_decay(double k, double a, double delta = 0.01);

nlohmann::json to_json(const AsymptoticReport& report);

}  // namespace fiberdyn::jacobsthal
