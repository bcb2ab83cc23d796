#include "bdris/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bdris {

void Scenario::validate() const {
    if (ris_positions.empty())
        throw std::invalid_argument("Scenario: at least one RIS element required");
    if (pathloss_exponent <= 0.0)
        throw std::invalid_argument("Scenario: pathloss_exponent must be > 0");
    if (tx_power_w <= 0.0)
        throw std::invalid_argument("Scenario: tx_power_w must be > 0");
    for (std::size_t i = 0; i < ris_positions.size(); ++i)
        for (std::size_t j = i + 1; j < ris_positions.size(); ++j)
            if (ris_positions[i] == ris_positions[j])
                throw std::invalid_argument("Scenario: RIS element positions must be distinct");
}

double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Vec3 ris_center(const Scenario& s) {
    Vec3 c{0.0, 0.0, 0.0};
    for (const auto& p : s.ris_positions) {
        c[0] += p[0];
        c[1] += p[1];
        c[2] += p[2];
    }
    const double n = static_cast<double>(s.ris_positions.size());
    return {c[0] / n, c[1] / n, c[2] / n};
}

Scenario make_localized_scenario(std::size_t n) {
    Scenario s;
    s.layout = RisLayout::Localized;
    s.ris_positions.reserve(n);
    const double half = 0.5 * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 20.0 + (static_cast<double>(i) - half) * 0.05;
        s.ris_positions.push_back({x, 0.0, 2.0});
    }
    return s;
}

Scenario make_distributed_scenario(std::size_t n) {
    Scenario s;
    s.layout = RisLayout::Distributed;
    s.ris_positions.reserve(n);
    if (n == 1) {
        s.ris_positions.push_back({20.0, 0.0, 2.0});
        return s;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 40.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        s.ris_positions.push_back({x, 0.0, 2.0});
    }
    return s;
}

namespace {

std::string vec3_str(const Vec3& v) {
    std::ostringstream os;
    os.precision(17);
    os << v[0] << "," << v[1] << "," << v[2];
    return os.str();
}

Vec3 parse_vec3(const std::string& s) {
    Vec3 v{};
    std::istringstream is(s);
    char comma = 0;
    if (!(is >> v[0] >> comma >> v[1] >> comma >> v[2]))
        throw std::invalid_argument("Scenario config: bad 3-vector '" + s + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string scenario_to_config(const Scenario& s) {
    std::ostringstream os;
    os.precision(17);
    os << "# positions in meters, c0 in dB, powers in watts\n";
    os << "tx_position = " << vec3_str(s.tx_position) << "\n";
    os << "rx_position = " << vec3_str(s.rx_position) << "\n";
    os << "layout = " << (s.layout == RisLayout::Localized ? "localized" : "distributed") << "\n";
    os << "c0_db = " << s.c0_db << "\n";
    os << "pathloss_exponent = " << s.pathloss_exponent << "\n";
    os << "tx_power_w = " << s.tx_power_w << "\n";
    os << "noise_power_w = " << s.noise_power_w << "\n";
    os << "direct_blocked = " << (s.direct_blocked ? 1 : 0) << "\n";
    for (const auto& p : s.ris_positions)
        os << "ris_element = " << vec3_str(p) << "\n";
    return os.str();
}

Scenario scenario_from_config(const std::string& text) {
    Scenario s;
    s.ris_positions.clear();
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("Scenario config: missing '=' in '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "tx_position") s.tx_position = parse_vec3(val);
        else if (key == "rx_position") s.rx_position = parse_vec3(val);
        else if (key == "ris_element") s.ris_positions.push_back(parse_vec3(val));
        else if (key == "layout")
            s.layout = (val == "distributed") ? RisLayout::Distributed : RisLayout::Localized;
        else if (key == "c0_db") s.c0_db = std::stod(val);
        else if (key == "pathloss_exponent") s.pathloss_exponent = std::stod(val);
        else if (key == "tx_power_w") s.tx_power_w = std::stod(val);
        else if (key == "noise_power_w") s.noise_power_w = std::stod(val);
        else if (key == "direct_blocked") s.direct_blocked = (std::stoi(val) != 0);
        else
            throw std::invalid_argument("Scenario config: unknown key '" + key + "'");
    }
    s.validate();
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return scenario_from_config(os.str());
}

}  // namespace bdris
