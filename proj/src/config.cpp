#include "mmimo/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mmimo {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& block,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in block '" + block + "'");
}

std::vector<double> number_list(const json& v, const std::string& what) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_array()) {
        for (const auto& e : v) out.push_back(e.get<double>());
    } else {
        throw ConfigError(what + " must be a number or an array of numbers");
    }
    if (out.empty()) throw ConfigError(what + " must not be empty");
    return out;
}

DetectorKind parse_detector(const std::string& name) {
    if (name == "fixed") return DetectorKind::fixed;
    if (name == "adaptive") return DetectorKind::adaptive;
    if (name == "practical_zf") return DetectorKind::practical_zf;
    if (name == "genie_zf") return DetectorKind::genie_zf;
    throw ConfigError("unknown detector '" + name + "'");
}

}  // namespace

std::vector<Topology> TopologyConfig::expand() const {
    std::vector<Topology> out;
    for (double dv : d)
        for (double hv : h)
            for (double rv : r_r) out.push_back(Topology(dv, hv, rv, D, mode));
    return out;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "(top level)",
               {"seed", "topology", "particle", "fit", "link", "sweep", "eta_f"});

    ExperimentConfig cfg;
    if (!root.contains("seed"))
        throw ConfigError("config must set an explicit seed (no wall-clock seeding)");
    cfg.seed = root.at("seed").get<std::uint64_t>();

    if (root.contains("topology")) {
        const auto& t = root["topology"];
        check_keys(t, "topology", {"d", "h", "r_r", "D", "distance_mode"});
        if (t.contains("d")) cfg.topology.d = number_list(t["d"], "topology.d");
        if (t.contains("h")) cfg.topology.h = number_list(t["h"], "topology.h");
        if (t.contains("r_r")) cfg.topology.r_r = number_list(t["r_r"], "topology.r_r");
        if (t.contains("D")) cfg.topology.D = t["D"].get<double>();
        if (t.contains("distance_mode")) {
            const auto m = t["distance_mode"].get<std::string>();
            if (m == "surface") cfg.topology.mode = DistanceMode::surface;
            else if (m == "center") cfg.topology.mode = DistanceMode::center;
            else throw ConfigError("distance_mode must be 'surface' or 'center'");
        }
    }

    if (root.contains("particle")) {
        const auto& p = root["particle"];
        check_keys(p, "particle",
                   {"n_molecules", "dt", "t_end", "grid_points", "absorption",
                    "far_field_accel", "accel_safety", "accel_max_dt", "single_sphere"});
        if (p.contains("n_molecules"))
            cfg.particle.n_molecules = p["n_molecules"].get<std::uint32_t>();
        if (p.contains("dt")) cfg.particle.dt = p["dt"].get<double>();
        if (p.contains("t_end")) cfg.particle.t_end = p["t_end"].get<double>();
        if (p.contains("grid_points")) cfg.particle.grid_points = p["grid_points"].get<int>();
        if (p.contains("absorption")) {
            const auto m = p["absorption"].get<std::string>();
            if (m == "chord") cfg.particle.absorption = AbsorptionMode::chord;
            else if (m == "discrete") cfg.particle.absorption = AbsorptionMode::discrete;
            else throw ConfigError("absorption must be 'chord' or 'discrete'");
        }
        if (p.contains("far_field_accel"))
            cfg.particle.far_field_accel = p["far_field_accel"].get<bool>();
        if (p.contains("accel_safety"))
            cfg.particle.accel_safety = p["accel_safety"].get<double>();
        if (p.contains("accel_max_dt"))
            cfg.particle.accel_max_dt = p["accel_max_dt"].get<double>();
        if (p.contains("single_sphere"))
            cfg.particle.single_sphere = p["single_sphere"].get<bool>();
    }

    if (root.contains("fit")) {
        const auto& f = root["fit"];
        check_keys(f, "fit", {"initial_guess", "fit_all_links"});
        if (f.contains("initial_guess")) {
            const auto g = f["initial_guess"].get<std::vector<double>>();
            if (g.size() != 3) throw ConfigError("fit.initial_guess must have 3 entries");
            cfg.fit.initial_guess = ModelParams{g[0], g[1], g[2]};
        }
        if (f.contains("fit_all_links"))
            cfg.fit.fit_all_links = f["fit_all_links"].get<bool>();
    }

    if (root.contains("link")) {
        const auto& l = root["link"];
        check_keys(l, "link",
                   {"Q1", "Q0", "t_s", "pi1", "sigma_n2", "mu_n", "L", "n_bits",
                    "replications", "channel_mode", "Q1_ref"});
        if (l.contains("Q1")) cfg.link.q1 = l["Q1"].get<double>();
        if (l.contains("Q0")) cfg.link.q0 = l["Q0"].get<double>();
        if (l.contains("t_s")) cfg.link.t_s = l["t_s"].get<double>();
        if (l.contains("pi1")) cfg.link.pi1 = l["pi1"].get<double>();
        if (l.contains("sigma_n2")) cfg.link.sigma_n_sq = l["sigma_n2"].get<double>();
        if (l.contains("mu_n")) cfg.link.mu_n = l["mu_n"].get<double>();
        if (l.contains("L")) cfg.link.memory = l["L"].get<int>();
        if (l.contains("n_bits")) cfg.link.n_bits = l["n_bits"].get<std::uint32_t>();
        if (l.contains("replications"))
            cfg.link.replications = l["replications"].get<std::uint32_t>();
        if (l.contains("channel_mode")) {
            const auto m = l["channel_mode"].get<std::string>();
            if (m == "binomial-taps") cfg.link.channel_mode = ChannelMode::binomial_taps;
            else if (m == "multinomial") cfg.link.channel_mode = ChannelMode::multinomial;
            else throw ConfigError("channel_mode must be 'binomial-taps' or 'multinomial'");
        }
        if (l.contains("Q1_ref")) cfg.link.q1_ref = l["Q1_ref"].get<double>();
        if (!(cfg.link.q1 > cfg.link.q0) || cfg.link.q0 < 0.0)
            throw ConfigError("link: require Q1 > Q0 >= 0");
        if (cfg.link.pi1 < 0.0 || cfg.link.pi1 > 1.0)
            throw ConfigError("link: pi1 must be in [0,1]");
        if (cfg.link.memory < 0) throw ConfigError("link: L must be >= 0");
        if (cfg.link.n_bits < 1) throw ConfigError("link: n_bits must be >= 1");
    }
    cfg.link.seed = cfg.seed;

    if (root.contains("sweep")) {
        const auto& s = root["sweep"];
        check_keys(s, "sweep",
                   {"Q1", "t_s", "detectors", "threshold_lo", "threshold_hi",
                    "threshold_step", "sir_t_s"});
        if (s.contains("sir_t_s"))
            cfg.sweep.sir_t_s = number_list(s["sir_t_s"], "sweep.sir_t_s");
        if (s.contains("Q1")) cfg.sweep.q1 = number_list(s["Q1"], "sweep.Q1");
        if (s.contains("t_s")) cfg.sweep.t_s = number_list(s["t_s"], "sweep.t_s");
        if (s.contains("detectors")) {
            cfg.sweep.detectors.clear();
            for (const auto& name : s["detectors"])
                cfg.sweep.detectors.push_back(parse_detector(name.get<std::string>()));
            if (cfg.sweep.detectors.empty())
                throw ConfigError("sweep.detectors must not be empty");
        }
        if (s.contains("threshold_lo")) cfg.sweep.threshold_lo = s["threshold_lo"].get<double>();
        if (s.contains("threshold_hi")) cfg.sweep.threshold_hi = s["threshold_hi"].get<double>();
        if (s.contains("threshold_step"))
            cfg.sweep.threshold_step = s["threshold_step"].get<double>();
        if (!(cfg.sweep.threshold_step > 0.0))
            throw ConfigError("sweep.threshold_step must be positive");
    }

    if (root.contains("eta_f")) cfg.eta_f = root["eta_f"].get<double>();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::uint64_t ExperimentConfig::hash() const {
    std::ostringstream s;
    s << seed << '|' << topology.D << '|' << static_cast<int>(topology.mode) << '|';
    for (double v : topology.d) s << v << ',';
    for (double v : topology.h) s << v << ',';
    for (double v : topology.r_r) s << v << ',';
    s << '|' << particle.n_molecules << ',' << particle.dt << ',' << particle.t_end
      << ',' << particle.grid_points << ',' << static_cast<int>(particle.absorption)
      << ',' << particle.far_field_accel << ',' << particle.accel_safety << ','
      << particle.accel_max_dt << ',' << particle.single_sphere;
    s << '|' << fit.initial_guess.b1 << ',' << fit.initial_guess.b2 << ','
      << fit.initial_guess.b3 << ',' << fit.fit_all_links;
    s << '|' << link.q1 << ',' << link.q0 << ',' << link.t_s << ',' << link.pi1 << ','
      << link.sigma_n_sq << ',' << link.mu_n << ',' << link.memory << ','
      << link.n_bits << ',' << link.replications << ','
      << static_cast<int>(link.channel_mode) << ',' << link.q1_ref;
    s << '|' << eta_f << '|';
    for (double v : sweep.q1) s << v << ',';
    for (double v : sweep.t_s) s << v << ',';
    for (auto k : sweep.detectors) s << static_cast<int>(k) << ',';
    for (double v : sweep.sir_t_s) s << v << ',';
    s << sweep.threshold_lo << ',' << sweep.threshold_hi << ',' << sweep.threshold_step;

    // FNV-1a 64-bit over the canonical text.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s.str()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace mmimo
