#include "polarl/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace polarl {

double noise_variance(double esn0_db) {
    return std::pow(10.0, -esn0_db / 10.0) / 2.0;
}

LlrWord bpsk_awgn_llr(const BitVec& codeword, const ChannelSpec& spec, RngStream& rng) {
    if (codeword.empty()) throw std::invalid_argument("bpsk_awgn_llr: empty codeword");
    const double sigma2 = noise_variance(spec.esn0_db);
    const double sigma = std::sqrt(sigma2);
    const double scale = 2.0 / sigma2;
    LlrWord out;
    out.values.resize(codeword.size());
    for (std::size_t i = 0; i < codeword.size(); ++i) {
        const double s = codeword[i] ? -1.0 : 1.0;
        const double y = s + sigma * rng.gaussian();
        out.values[i] = scale * y;
    }
    return out;
}

}  // namespace polarl
