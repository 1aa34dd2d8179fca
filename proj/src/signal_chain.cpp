#include "foldsense/signal_chain.hpp"

#include "foldsense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace foldsense {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void TankConfig::validate() const {
    if (!(inductance > 0.0)) throw ValidationError("tank inductance must be positive");
    if (!(c_fixed_pf + c_parasitic_pf > 0.0))
        throw ValidationError("fixed tank capacitance must be positive");
    if (bits < 8 || bits > 32) throw ValidationError("converter bits must lie in [8, 32]");
    if (!(f_ref_hz > 0.0)) throw ValidationError("reference clock must be positive");
    if (noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
    // The reference clock has to outrun the tank.
    if (f_ref_hz < 2.0 * resonant_frequency(0.0, *this))
        throw ValidationError("reference clock below twice the maximum tank frequency");
}

double resonant_frequency(double c_sensor_pf, const TankConfig& cfg) {
    if (c_sensor_pf < 0.0) throw ValidationError("sensor capacitance must be >= 0");
    const double c_total = (c_sensor_pf + cfg.c_fixed_pf + cfg.c_parasitic_pf) * 1e-12;
    if (!(c_total > 0.0)) throw ValidationError("total tank capacitance must be positive");
    return 1.0 / (kTwoPi * std::sqrt(cfg.inductance * c_total));
}

std::uint64_t counts_from_frequency(double f_hz, const TankConfig& cfg) {
    if (!(f_hz >= 0.0)) throw ValidationError("frequency must be >= 0");
    if (f_hz >= cfg.f_ref_hz) throw ValidationError("tank frequency at or above the reference clock");
    const double raw = f_hz / cfg.f_ref_hz * static_cast<double>(std::uint64_t(1) << cfg.bits);
    return static_cast<std::uint64_t>(std::llround(raw));
}

double frequency_from_counts(std::uint64_t counts, const TankConfig& cfg) {
    return static_cast<double>(counts) / static_cast<double>(std::uint64_t(1) << cfg.bits) *
           cfg.f_ref_hz;
}

double capacitance_from_counts(std::uint64_t counts, const TankConfig& cfg) {
    const double f = frequency_from_counts(counts, cfg);
    if (!(f > 0.0)) throw ValidationError("zero count has no capacitance");
    const double c_total = 1.0 / (cfg.inductance * kTwoPi * kTwoPi * f * f);
    return c_total * 1e12 - cfg.c_fixed_pf - cfg.c_parasitic_pf;
}

double lsb_capacitance(double c_sensor_pf, const TankConfig& cfg) {
    const double f = resonant_frequency(c_sensor_pf, cfg);
    const double dc_df = 2.0 / (cfg.inductance * kTwoPi * kTwoPi * f * f * f);  // F per Hz
    const double df = cfg.f_ref_hz / static_cast<double>(std::uint64_t(1) << cfg.bits);
    return dc_df * df * 1e12;
}

Calibrator::Calibrator(std::optional<std::size_t> window) : window_(window) {
    if (window_ && *window_ < 1) throw ValidationError("calibrator window must be >= 1");
}

double Calibrator::update(std::uint64_t raw) {
    if (!window_) {
        if (!initialized_) {
            min_ = max_ = raw;
            initialized_ = true;
        } else {
            min_ = std::min(min_, raw);
            max_ = std::max(max_, raw);
        }
    } else {
        const std::uint64_t oldest = (tick_ >= *window_) ? tick_ - *window_ + 1 : 0;
        while (!min_q_.empty() && min_q_.front().first < oldest) min_q_.pop_front();
        while (!max_q_.empty() && max_q_.front().first < oldest) max_q_.pop_front();
        while (!min_q_.empty() && min_q_.back().second >= raw) min_q_.pop_back();
        while (!max_q_.empty() && max_q_.back().second <= raw) max_q_.pop_back();
        min_q_.emplace_back(tick_, raw);
        max_q_.emplace_back(tick_, raw);
        min_ = min_q_.front().second;
        max_ = max_q_.front().second;
        initialized_ = true;
        ++tick_;
    }
    if (max_ == min_) return 0.0;  // no range yet
    return 100.0 * static_cast<double>(raw - min_) / static_cast<double>(max_ - min_);
}

std::uint64_t Calibrator::running_min() const {
    if (!initialized_) throw ValidationError("calibrator has seen no samples");
    return min_;
}

std::uint64_t Calibrator::running_max() const {
    if (!initialized_) throw ValidationError("calibrator has seen no samples");
    return max_;
}

std::vector<double> derivative(std::span<const double> series, double dt) {
    if (series.size() < 3) throw ValidationError("derivative needs at least three samples");
    if (!(dt > 0.0)) throw ValidationError("sample period must be positive");
    const std::size_t n = series.size();
    std::vector<double> out(n);
    out[0] = (series[1] - series[0]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
    out[n - 1] = (series[n - 1] - series[n - 2]) / dt;
    return out;
}

namespace {

/// Deterministic Gaussian source: explicit Box-Muller over mt19937_64 so the
/// stream does not depend on the standard library implementation.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    double uniform() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace

std::vector<SignalSample> synthesize_acquisition(std::span<const double> t_s,
                                                 std::span<const double> c_pf,
                                                 const TankConfig& cfg, std::uint64_t seed,
                                                 std::optional<std::size_t> window) {
    if (t_s.size() != c_pf.size()) throw ValidationError("timeline sizes disagree");
    cfg.validate();
    for (double c : c_pf)
        if (!std::isfinite(c)) throw ValidationError("non-finite capacitance sample");

    GaussianSource gauss(seed);
    Calibrator calib(window);
    const double cap = static_cast<double>(cfg.max_count());

    std::vector<SignalSample> out(t_s.size());
    for (std::size_t i = 0; i < t_s.size(); ++i) {
        const double f = resonant_frequency(std::max(0.0, c_pf[i]), cfg);
        double raw = f / cfg.f_ref_hz * static_cast<double>(std::uint64_t(1) << cfg.bits);
        const double t = t_s[i];
        if (cfg.drift.period_s > 0.0)
            raw += cfg.drift.amplitude_counts * std::sin(kTwoPi * t / cfg.drift.period_s);
        raw += cfg.drift.slope_counts_per_s * t;
        if (cfg.noise_sigma > 0.0) raw += cfg.noise_sigma * gauss.next();
        if (cfg.spikes && gauss.uniform() < cfg.spike_prob)
            raw += (gauss.uniform() < 0.5 ? -1.0 : 1.0) * cfg.spike_amp_counts;
        raw = std::clamp(raw, 0.0, cap);
        const auto counts = static_cast<std::uint64_t>(std::llround(raw));

        out[i].t = t;
        out[i].counts = counts;
        // Complement so the normalized trace rises with capacitance.
        out[i].normalized = calib.update(cfg.max_count() - counts);
    }

    if (out.size() >= 3) {
        std::vector<double> norm(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) norm[i] = out[i].normalized;
        const double dt = t_s.size() > 1 ? t_s[1] - t_s[0] : 1.0;
        auto d = derivative(norm, dt > 0.0 ? dt : 1.0);
        for (std::size_t i = 0; i < out.size(); ++i) out[i].derivative = d[i];
    }
    return out;
}

}  // namespace foldsense
