#pragma once

namespace shortpkt {

// Physical-layer description: linear SNR rho, payload k bits, blocklength n
// channel uses (real-valued AWGN, unit noise variance).
struct ChannelParams {
    double rho;
    int k;
    int n;
};

double db_to_linear(double snr_db);

// Packet error probability from the normal approximation:
//   eps = Q( (n C - k + 0.5 log2 n) / sqrt(n V) )
// with C = 0.5 log2(1 + rho) bits per channel use and channel dispersion
// V = rho (rho + 2) / (2 (rho + 1)^2) * (log2 e)^2 bits^2 per channel use.
// Clamped to [1e-300, nextafter(1, 0)] so callers never see exactly 0 or 1.
double error_probability(const ChannelParams& params);

} // namespace shortpkt
