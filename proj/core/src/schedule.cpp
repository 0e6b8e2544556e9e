#include "hasflow/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hasflow::schedule {

static void check_prefix(int H, int d) {
    if (H < 1) throw std::invalid_argument("chunk length H must be >= 1");
    if (d < 0 || d >= H)
        throw std::invalid_argument("prefix length d=" + std::to_string(d) +
                                    " must satisfy 0 <= d < H=" + std::to_string(H));
}

HitTimes hit_times(int H, int d, double alpha, double u_d) {
    check_prefix(H, d);
    if (!(u_d > 0.0 && u_d < 1.0)) throw std::invalid_argument("u_d must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");

    HitTimes out;
    out.values.assign(H, 0.0);
    out.prefix_len = d;
    out.alpha = alpha;
    out.u_d = u_d;
    // Denominator clamps via max(H-1-d, 1) so a single valid action (d = H-1)
    // takes hit time u_d.
    const double span = std::max(H - 1 - d, 1);
    for (int i = d; i < H; ++i) {
        double base = 1.0 - static_cast<double>(i - d) / span;
        out.values[i] = std::pow(base, alpha) * u_d;
    }
    return out;
}

TimestepVector local_timesteps(double rho, const HitTimes& u) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must lie in [0, 1]");
    TimestepVector out;
    out.global_rho = rho;
    out.values.assign(u.values.size(), 0.0);
    for (int i = u.prefix_len; i < static_cast<int>(u.values.size()); ++i) {
        double ui = u.values[i];
        double t = (rho - ui) / (1.0 - ui);
        out.values[i] = (t <= kFinalizeTol) ? 0.0 : t;
    }
    return out;
}

TimestepVector constant_timesteps(double rho, int H, int d) {
    check_prefix(H, d);
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must lie in [0, 1]");
    TimestepVector out;
    out.global_rho = rho;
    out.values.assign(H, 0.0);
    for (int i = d; i < H; ++i) out.values[i] = rho;
    return out;
}

PrefixMask prefix_mask(int H, int d) {
    check_prefix(H, d);
    PrefixMask out;
    out.bits.assign(H, 0);
    for (int i = d; i < H; ++i) out.bits[i] = 1;
    out.count_ones = H - d;
    return out;
}

ScheduleSample sample_training_schedule(Rng& rng, int H, double alpha, double u_d, double p,
                                        int d_max) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("mixing probability p must lie in [0, 1]");
    check_prefix(H, d_max);

    ScheduleSample s;
    s.rho = rng.uniform();
    s.d = rng.uniform_int(0, d_max);
    s.kind = rng.bernoulli(p) ? ScheduleKind::HAS : ScheduleKind::Constant;
    if (s.kind == ScheduleKind::HAS) {
        s.tau = local_timesteps(s.rho, hit_times(H, s.d, alpha, u_d));
    } else {
        s.tau = constant_timesteps(s.rho, H, s.d);
    }
    s.mask = prefix_mask(H, s.d);
    return s;
}

int finalize_step(double u_i, int N) {
    for (int j = 1; j <= N; ++j) {
        double rho_next = static_cast<double>(N - j) / N;  // rho^{j+1}, zero at j = N
        if (rho_next <= u_i + kFinalizeTol) return j;
    }
    return N;
}

}  // namespace hasflow::schedule
