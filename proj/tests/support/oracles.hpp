#pragma once

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "hmarl/explain.hpp"
#include "hmarl/ppo.hpp"

namespace oracle {

inline double deg(double rad) { return rad * 180.0 / M_PI; }

inline double distance(double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    return std::sqrt(dx * dx + dy * dy);
}

// Compass bearing of (dx, dy), folded difference to `heading`.
inline double angle_off(double heading_deg, double dx, double dy) {
    double los = deg(std::atan2(dx, dy));
    double d = std::fmod(los - heading_deg, 360.0);
    if (d < 0) d += 360.0;
    return d > 180.0 ? 360.0 - d : d;
}

inline double ata(double ox, double oy, double oh, double tx, double ty) { return angle_off(oh, tx - ox, ty - oy); }

inline double aspect(double ox, double oy, double tx, double ty, double th) {
    return angle_off(th, tx - ox, ty - oy);
}

// Sum over k >= t of (gamma*lambda)^(k-t) * delta_k within the segment of t.
inline void gae(const hmarl::RolloutBuffer& buf, double gamma, double lambda, std::vector<double>& adv,
                std::vector<double>& ret) {
    const auto n = buf.steps.size();
    adv.assign(n, 0.0);
    ret.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double sum = 0.0;
        double w = 1.0;
        for (std::size_t k = t; k < n; ++k) {
            const auto& s = buf.steps[k];
            const bool end = s.done || s.truncated || k + 1 == n;
            double next_v = 0.0;
            if (!s.done) next_v = end ? s.bootstrap_value : buf.steps[k + 1].value;
            const double delta = s.reward + gamma * next_v - s.value;
            sum += w * delta;
            if (end) break;
            w *= gamma * lambda;
        }
        adv[t] = sum;
        ret[t] = sum + buf.steps[t].value;
    }
}

// Streaming recount keyed by exact coordinates.
using Count = std::array<std::int64_t, hmarl::kNumModes>;

inline std::map<std::array<double, 3>, Count> recount(const std::vector<hmarl::ActivationRecord>& records) {
    std::map<std::array<double, 3>, Count> out;
    for (const auto& r : records) out[r.cell][static_cast<std::size_t>(r.mode)] += 1;
    return out;
}

// Log of the softmax probability of index `a` in `logits`, by explicit enumeration.
inline double log_softmax(const std::vector<double>& logits, int a) {
    long double z = 0.0L;
    for (double l : logits) z += std::exp(static_cast<long double>(l));
    return static_cast<double>(static_cast<long double>(logits[static_cast<std::size_t>(a)]) - std::log(z));
}

inline double entropy(const std::vector<double>& logits) {
    long double z = 0.0L;
    for (double l : logits) z += std::exp(static_cast<long double>(l));
    long double h = 0.0L;
    for (double l : logits) {
        const long double p = std::exp(static_cast<long double>(l)) / z;
        if (p > 0) h -= p * std::log(p);
    }
    return static_cast<double>(h);
}

}  // namespace oracle
