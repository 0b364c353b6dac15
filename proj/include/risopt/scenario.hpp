#ifndef RISOPT_SCENARIO_HPP_
#define RISOPT_SCENARIO_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace risopt {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

double distance(Vec2 a, Vec2 b);

enum class FadingModel { none, rayleigh };

/// All per-scenario parameters: geometry, link budget, energy model,
/// arrival statistics and the simulation horizon. Field names double as
/// the keys of the flat key=value config format.
struct ScenarioConfig {
    Vec2 user1_pos{1.0, 1.0};
    Vec2 user2_pos{1000.0, 1.0};
    Vec2 ris_pos{500.0, 150.0};
    int n_elements = 50;
    double p_max = 1.0;           // W, peak transmit power per user
    double p_min = 0.0;           // W, lower transmit power bound
    double p_e = 5e-3;            // W dissipated per active element
    double t_s = 1.0;             // s, slot duration
    double sigma2 = 3.9811e-11;   // W, noise power
    double alpha = 1.0;           // reflection coefficient, (0,1]
    double r_th = 0.1;            // bit/s/Hz, per-direction rate threshold
    double zeta = 0.0;            // objective weight: panel energy vs user energy
    double eta = 0.9;             // harvest conversion efficiency
    double path_loss_exponent = 2.0;
    double battery_capacity = 5.0;  // J
    double battery_initial = 5.0;   // J
    double theta_mean = 2.0;        // W, arrival distribution parameters
    double theta_var = 0.25;
    double theta_lo = 0.0;
    double theta_hi = 2.4;
    int n_slots = 10;
    bool los_present = false;
    FadingModel fading = FadingModel::none;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on any violated parameter constraint.
    void validate() const;
};

/// One channel draw for a scenario: the direct-link amplitude and, per
/// direction, the N per-element cascade amplitudes (product of the two
/// hop amplitudes through that element).
struct ChannelRealization {
    double h_direct = 0.0;
    std::array<std::vector<double>, 2> cascade;
};

/// Deterministic random stream with explicitly documented draw
/// transforms, so tests can reproduce the sequence independently:
///   uniform01 = (mt19937_64 word >> 11) * 2^-53
///   rayleigh  = sqrt(-log(1 - u)),       unit mean power
///   normal    = mean + sd * sqrt(-2 log(1-u1)) * cos(2 pi u2)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01();
    double rayleigh_amplitude();
    double normal(double mean, double sd);

private:
    std::mt19937_64 gen_;
};

/// Amplitude gain at the given distance: d^(-exponent/2), i.e. power
/// gain d^(-exponent). Throws std::domain_error for distance <= 0.
double path_loss_amplitude(double dist, double exponent);

/// Draws the channel realization for one scenario. Per element n the
/// draw order is: hop-1 Rayleigh amplitude, then hop-2 (fading only);
/// the product is shared by both directions.
ChannelRealization sample_channels(const ScenarioConfig& config, Rng& rng);

/// One energy-arrival draw (W) from the truncated normal
/// N(theta_mean, theta_var) restricted to [theta_lo, theta_hi], via
/// rejection. theta_var == 0 degenerates to clamp(theta_mean).
double sample_energy_arrival(const ScenarioConfig& config, Rng& rng);

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

/// Applies one key=value pair; same keys as the config file. Unknown
/// keys throw std::invalid_argument.
void apply_setting(ScenarioConfig& config, const std::string& key,
                   const std::string& value);


}  // namespace risopt

#endif  // RISOPT_SCENARIO_HPP_
