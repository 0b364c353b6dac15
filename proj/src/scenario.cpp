#include "risopt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace risopt {

double distance(Vec2 a, Vec2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) {
        throw std::invalid_argument("config: " + msg);
    };
    if (n_elements < 1) fail("n_elements must be >= 1");
    if (n_slots < 1) fail("n_slots must be >= 1");
    if (!(sigma2 > 0.0)) fail("sigma2 must be > 0");
    if (p_min < 0.0 || p_min > p_max) fail("need 0 <= p_min <= p_max");
    if (!(alpha > 0.0) || alpha > 1.0) fail("alpha must be in (0, 1]");
    if (eta < 0.0 || eta > 1.0) fail("eta must be in [0, 1]");
    if (zeta < 0.0 || zeta > 1.0) fail("zeta must be in [0, 1]");
    if (p_e < 0.0) fail("p_e must be >= 0");
    if (!(t_s > 0.0)) fail("t_s must be > 0");
    if (r_th < 0.0) fail("r_th must be >= 0");
    if (theta_lo > theta_hi) fail("need theta_lo <= theta_hi");
    if (theta_var < 0.0) fail("theta_var must be >= 0");
    if (battery_capacity < 0.0) fail("battery_capacity must be >= 0");
    if (battery_initial < 0.0 || battery_initial > battery_capacity)
        fail("need 0 <= battery_initial <= battery_capacity");
}

double Rng::uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::rayleigh_amplitude() {
    return std::sqrt(-std::log1p(-uniform01()));
}

double Rng::normal(double mean, double sd) {
    double u1 = uniform01();
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log1p(-u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
}

double path_loss_amplitude(double dist, double exponent) {
    if (!(dist > 0.0)) {
        throw std::domain_error("path_loss_amplitude: distance must be > 0");
    }
    return std::pow(dist, -exponent / 2.0);
}

ChannelRealization sample_channels(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    const int n = config.n_elements;
    ChannelRealization ch;
    ch.h_direct =
        config.los_present
            ? path_loss_amplitude(distance(config.user1_pos, config.user2_pos),
                                  config.path_loss_exponent)
            : 0.0;
    const double a1 = path_loss_amplitude(
        distance(config.user1_pos, config.ris_pos), config.path_loss_exponent);
    const double a2 = path_loss_amplitude(
        distance(config.user2_pos, config.ris_pos), config.path_loss_exponent);
    ch.cascade[0].resize(n);
    ch.cascade[1].resize(n);
    for (int i = 0; i < n; ++i) {
        double gain = 1.0;
        if (config.fading == FadingModel::rayleigh) {
            gain = rng.rayleigh_amplitude() * rng.rayleigh_amplitude();
        }
        // both hop amplitudes enter the product, so the cascade magnitude
        // is direction-symmetric
        ch.cascade[0][i] = a1 * a2 * gain;
        ch.cascade[1][i] = a1 * a2 * gain;
    }
    return ch;
}

double sample_energy_arrival(const ScenarioConfig& config, Rng& rng) {
    if (!(config.theta_lo < config.theta_hi)) {
        throw std::domain_error(
            "sample_energy_arrival: degenerate interval [theta_lo, theta_hi]");
    }
    const double sd = std::sqrt(config.theta_var);
    if (sd == 0.0) {
        return std::clamp(config.theta_mean, config.theta_lo, config.theta_hi);
    }
    constexpr int kMaxAttempts = 1000000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        double draw = rng.normal(config.theta_mean, sd);
        if (draw >= config.theta_lo && draw <= config.theta_hi) {
            return draw;
        }
    }
    throw std::runtime_error(
        "sample_energy_arrival: rejection sampling did not converge; "
        "interval carries too little probability mass");
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key +
                                    ": '" + value + "'");
    }
    if (pos != value.size()) {
        throw std::invalid_argument("config: trailing characters in value for " +
                                    key + ": '" + value + "'");
    }
    return out;
}

int parse_int(const std::string& key, const std::string& value) {
    double d = parse_double(key, value);
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
        throw std::invalid_argument("config: expected integer for " + key);
    }
    return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: expected true/false for " + key);
}

Vec2 parse_vec2(const std::string& key, const std::string& value) {
    auto comma = value.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("config: expected 'x,y' for " + key);
    }
    Vec2 v;
    v.x = parse_double(key, value.substr(0, comma));
    v.y = parse_double(key, value.substr(comma + 1));
    return v;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_setting(ScenarioConfig& config, const std::string& key,
                   const std::string& value) {
    if (key == "user1_pos") config.user1_pos = parse_vec2(key, value);
    else if (key == "user2_pos") config.user2_pos = parse_vec2(key, value);
    else if (key == "ris_pos") config.ris_pos = parse_vec2(key, value);
    else if (key == "n_elements") config.n_elements = parse_int(key, value);
    else if (key == "p_max") config.p_max = parse_double(key, value);
    else if (key == "p_min") config.p_min = parse_double(key, value);
    else if (key == "p_e") config.p_e = parse_double(key, value);
    else if (key == "t_s") config.t_s = parse_double(key, value);
    else if (key == "sigma2") config.sigma2 = parse_double(key, value);
    else if (key == "alpha") config.alpha = parse_double(key, value);
    else if (key == "r_th") config.r_th = parse_double(key, value);
    else if (key == "zeta") config.zeta = parse_double(key, value);
    else if (key == "eta") config.eta = parse_double(key, value);
    else if (key == "path_loss_exponent")
        config.path_loss_exponent = parse_double(key, value);
    else if (key == "battery_capacity")
        config.battery_capacity = parse_double(key, value);
    else if (key == "battery_initial")
        config.battery_initial = parse_double(key, value);
    else if (key == "theta_mean") config.theta_mean = parse_double(key, value);
    else if (key == "theta_var") config.theta_var = parse_double(key, value);
    else if (key == "theta_lo") config.theta_lo = parse_double(key, value);
    else if (key == "theta_hi") config.theta_hi = parse_double(key, value);
    else if (key == "n_slots") config.n_slots = parse_int(key, value);
    else if (key == "los_present") config.los_present = parse_bool(key, value);
    else if (key == "fading") {
        if (value == "none") config.fading = FadingModel::none;
        else if (value == "rayleigh") config.fading = FadingModel::rayleigh;
        else throw std::invalid_argument("config: unknown fading model '" +
                                         value + "'");
    } else if (key == "seed") {
        try {
            std::size_t pos = 0;
            config.seed = std::stoull(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad integer value for seed: '" +
                                        value + "'");
        }
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value");
        }
        apply_setting(config, trim(line.substr(0, eq)),
                      trim(line.substr(eq + 1)));
    }
    config.validate();
    return config;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    return parse_config(in);
}

}  // namespace risopt
