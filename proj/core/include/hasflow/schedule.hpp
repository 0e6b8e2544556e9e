#pragma once

#include <cstdint>
#include <vector>

#include "hasflow/rng.hpp"

namespace hasflow::schedule {

// Tolerance for deciding that a local timestep has reached zero. The global
// timestep grid rho^j = (N-j+1)/N accumulates rounding, so exact comparison
// against hit times would flap.
inline constexpr double kFinalizeTol = 1e-12;

// Per-index global timesteps at which each action is fully denoised.
// Prefix slots (i < prefix_len) carry hit time 0 by convention; the vector
// always has length H so downstream math indexes uniformly.
struct HitTimes {
    std::vector<double> values;  // length H, non-increasing on [d, H-1]
    int prefix_len = 0;          // d
    double alpha = 1.0;
    double u_d = 0.0;            // hit time of the first valid action
};

// Per-index local flow timesteps for one global timestep rho.
struct TimestepVector {
    std::vector<double> values;  // length H, zeros on the prefix
    double global_rho = 0.0;
};

// Loss mask: 1 for suffix (trainable) actions, 0 for the conditioning prefix.
struct PrefixMask {
    std::vector<uint8_t> bits;  // length H
    int count_ones = 0;         // H - d, always >= 1
};

enum class ScheduleKind { HAS, Constant };

// One draw of the mixed training schedule.
struct ScheduleSample {
    double rho = 0.0;
    int d = 0;
    ScheduleKind kind = ScheduleKind::Constant;
    TimestepVector tau;
    PrefixMask mask;
};

// Hit times u_i = (1 - (i-d)/max(H-1-d, 1))^alpha * u_d for i in [d, H-1].
// Throws std::invalid_argument on domain errors (d >= H, u_d outside (0,1),
// alpha outside (0,1]).
HitTimes hit_times(int H, int d, double alpha, double u_d);

// tau_i = 0 for i < d, max(0, (rho - u_i)/(1 - u_i)) otherwise.
TimestepVector local_timesteps(double rho, const HitTimes& u);

// tau_i = 0 for i < d, rho otherwise.
TimestepVector constant_timesteps(double rho, int H, int d);

PrefixMask prefix_mask(int H, int d);

// rho ~ U(0,1), d ~ U{0..d_max}, HAS with probability p else constant.
ScheduleSample sample_training_schedule(Rng& rng, int H, double alpha, double u_d, double p,
                                        int d_max);

// Smallest sampler step j (1-based, grid rho^j = (N-j+1)/N, rho^{N+1} := 0)
// after which the action with hit time u_i is finalized, i.e. the smallest j
// with rho^{j+1} <= u_i.
int finalize_step(double u_i, int N);

}  // namespace hasflow::schedule
