#include "shortpkt/channel.hpp"

#include <cmath>

#include "shortpkt/errors.hpp"

namespace shortpkt {

double db_to_linear(double snr_db) {
    return std::pow(10.0, snr_db / 10.0);
}

double error_probability(const ChannelParams& params) {
    if (!(params.rho > 0.0) || !std::isfinite(params.rho))
        throw ParameterError("error_probability: rho must be positive and finite");
    if (params.k < 1) throw ParameterError("error_probability: k must be >= 1");
    if (params.n < 1) throw ParameterError("error_probability: n must be >= 1");

    const double rho = params.rho;
    const double log2e = 1.4426950408889634;
    const double capacity = 0.5 * std::log2(1.0 + rho);
    const double dispersion =
        rho * (rho + 2.0) / (2.0 * (rho + 1.0) * (rho + 1.0)) * log2e * log2e;

    const double arg = (params.n * capacity - params.k + 0.5 * std::log2(double(params.n))) /
                       std::sqrt(params.n * dispersion);
    // Q(x) = erfc(x / sqrt 2) / 2
    double eps = 0.5 * std::erfc(arg / std::sqrt(2.0));

    const double eps_min = 1e-300;
    if (eps < eps_min) eps = eps_min;
    // 1 - eps_min is not representable in double; the nearest value that
    // still avoids an exact 1.0 is the predecessor of 1.
    if (eps >= 1.0) eps = std::nextafter(1.0, 0.0);
    return eps;
}

} // namespace shortpkt
