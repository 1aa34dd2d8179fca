#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace foldsense {

/// Slow additive drift on the raw counts: sinusoid plus linear term.
struct DriftModel {
    double amplitude_counts = 0.0;
    double period_s = 0.0;  // <= 0 disables the sinusoid
    double slope_counts_per_s = 0.0;
};

/// LC-tank readout front end. The sensor capacitance detunes the tank; the
/// converter reports the resonant frequency as a fraction of the reference
/// clock in `bits`-wide counts.
struct TankConfig {
    double inductance = 18e-6;    // H
    double c_fixed_pf = 33.0;     // tank capacitor
    double c_parasitic_pf = 0.0;
    double f_ref_hz = 40e6;
    int bits = 28;
    double noise_sigma = 0.0;     // counts, Gaussian
    DriftModel drift;
    bool spikes = false;          // occasional disturbance pulses
    double spike_prob = 0.0;      // per sample
    double spike_amp_counts = 0.0;

    std::uint64_t max_count() const { return (std::uint64_t(1) << bits) - 1; }
    void validate() const;
};

double resonant_frequency(double c_sensor_pf, const TankConfig& cfg);  // Hz
std::uint64_t counts_from_frequency(double f_hz, const TankConfig& cfg);
double frequency_from_counts(std::uint64_t counts, const TankConfig& cfg);
double capacitance_from_counts(std::uint64_t counts, const TankConfig& cfg);  // pF

/// |dC/dcount| around an operating point; the quantization error bound for
/// round-trip checks.
double lsb_capacitance(double c_sensor_pf, const TankConfig& cfg);

/// Running min/max normalization to a 0..100 range. Unbounded by default;
/// with a window it forgets samples older than `window`, which is what lets
/// it ride out monotone drifts.
class Calibrator {
public:
    explicit Calibrator(std::optional<std::size_t> window = std::nullopt);

    double update(std::uint64_t raw);  // returns normalized in [0, 100]

    bool initialized() const { return initialized_; }
    std::uint64_t running_min() const;
    std::uint64_t running_max() const;

private:
    std::optional<std::size_t> window_;
    bool initialized_ = false;
    std::uint64_t min_ = 0, max_ = 0;  // unbounded mode
    std::uint64_t tick_ = 0;
    std::deque<std::pair<std::uint64_t, std::uint64_t>> min_q_, max_q_;  // (tick, value)
};

/// Central differences inside, one-sided at the ends.
std::vector<double> derivative(std::span<const double> series, double dt);

struct SignalSample {
    double t = 0.0;
    std::uint64_t counts = 0;
    double normalized = 0.0;
    double derivative = 0.0;  // of the normalized signal, 1/s
};

/// Full acquisition emulation: tank, quantization, seeded noise, drift, the
/// running-min/max normalization, and the derivative pass. The calibrator is
/// fed the complemented counts so that rising capacitance reads upward, the
/// way the acquisition display expects.
std::vector<SignalSample> synthesize_acquisition(std::span<const double> t_s,
                                                 std::span<const double> c_pf,
                                                 const TankConfig& cfg, std::uint64_t seed,
                                                 std::optional<std::size_t> window = std::nullopt);

}  // namespace foldsense
