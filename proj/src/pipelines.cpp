#include "mmimo/pipelines.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace mmimo {

namespace fs = std::filesystem;

namespace {

std::string topo_tag(const Topology& t) {
    std::ostringstream s;
    s << "d" << t.d() << "_h" << t.h() << "_r" << t.radius();
    return s.str();
}

std::ofstream open_output(const fs::path& path, const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# config_hash=" << std::hex << cfg.hash() << std::dec
        << " seed=" << cfg.seed << "\n";
    out << std::setprecision(17);
    return out;
}

Eigen::ArrayXd time_grid(const ParticleConfig& p) {
    Eigen::ArrayXd grid(p.grid_points);
    for (int i = 0; i < p.grid_points; ++i)
        grid[i] = p.t_end * static_cast<double>(i + 1) / p.grid_points;
    return grid;
}

struct CdfFile {
    double d = 0, h = 0, r_r = 0, D = 0;
    std::map<std::string, std::pair<Eigen::ArrayXd, Eigen::ArrayXd>> links;
};

CdfFile read_cdf_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    CdfFile file;
    std::map<std::string, std::vector<std::pair<double, double>>> raw;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string tok;
            while (meta >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const std::string val = tok.substr(eq + 1);
                if (key == "d") file.d = std::stod(val);
                else if (key == "h") file.h = std::stod(val);
                else if (key == "r_r") file.r_r = std::stod(val);
                else if (key == "D") file.D = std::stod(val);
            }
            continue;
        }
        if (line.rfind("link,", 0) == 0) continue;  // header
        std::istringstream row(line);
        std::string link, t_str, f_str;
        std::getline(row, link, ',');
        std::getline(row, t_str, ',');
        std::getline(row, f_str, ',');
        raw[link].emplace_back(std::stod(t_str), std::stod(f_str));
    }
    for (auto& [link, points] : raw) {
        Eigen::ArrayXd t(points.size()), f(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            t[i] = points[i].first;
            f[i] = points[i].second;
        }
        file.links[link] = {t, f};
    }
    return file;
}

}  // namespace

void cmd_characterize(const ExperimentConfig& cfg, const fs::path& out_dir,
                      unsigned workers) {
    fs::create_directories(out_dir);
    const auto grid = time_grid(cfg.particle);

    auto summary = open_output(out_dir / "characterize_summary.csv", cfg);
    summary << "d,h,r_r,emitter,n_molecules,absorbed_own,absorbed_cross,free\n";

    for (const auto& topo : cfg.topology.expand()) {
        auto out = open_output(out_dir / ("cdf_" + topo_tag(topo) + ".csv"), cfg);
        out << "# d=" << topo.d() << " h=" << topo.h() << " r_r=" << topo.radius()
            << " D=" << topo.diffusion() << " n_molecules=" << cfg.particle.n_molecules
            << " dt=" << cfg.particle.dt << "\n";
        out << "link,t,F\n";

        for (int emitter = 1; emitter <= 2; ++emitter) {
            SimParams sp;
            sp.n_molecules = cfg.particle.n_molecules;
            sp.dt = cfg.particle.dt;
            sp.t_end = cfg.particle.t_end;
            sp.seed = cfg.seed;
            sp.emitter = emitter;
            sp.absorption = cfg.particle.absorption;
            sp.far_field_accel = cfg.particle.far_field_accel;
            sp.accel_safety = cfg.particle.accel_safety;
            sp.accel_max_dt = cfg.particle.accel_max_dt;
            sp.single_sphere = cfg.particle.single_sphere;
            sp.workers = workers;

            const auto records = run_one_shot(topo, sp);
            const auto cdfs = estimate_cdf(records, grid, sp.n_molecules, emitter);

            std::uint64_t own = 0, cross = 0;
            for (const auto& r : records) {
                if (r.absorbed_at == emitter) ++own;
                else if (r.absorbed_at != 0) ++cross;
            }
            summary << topo.d() << ',' << topo.h() << ',' << topo.radius() << ','
                    << emitter << ',' << cfg.particle.n_molecules << ',' << own << ','
                    << cross << ',' << (cfg.particle.n_molecules - own - cross) << "\n";

            for (const auto& cdf : cdfs) {
                const std::string label =
                    "F" + std::to_string(cdf.link.rx) + std::to_string(cdf.link.tx);
                for (Eigen::Index i = 0; i < cdf.times.size(); ++i)
                    out << label << ',' << cdf.times[i] << ',' << cdf.values[i] << "\n";
            }
        }
    }
}

void cmd_fit(const ExperimentConfig& cfg, const fs::path& cdf_dir,
             const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<fs::path> cdf_files;
    for (const auto& entry : fs::directory_iterator(cdf_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("cdf_", 0) == 0 && entry.path().extension() == ".csv")
            cdf_files.push_back(entry.path());
    }
    std::sort(cdf_files.begin(), cdf_files.end());
    if (cdf_files.empty())
        throw std::runtime_error("no cdf_*.csv files in " + cdf_dir.string());

    auto table = open_output(out_dir / "fit_table.csv", cfg);
    table << "d,h,r_r,D,link,b1,b2,b3,rmse,iterations,converged\n";
    auto grid_csv = open_output(out_dir / "fit_grid.csv", cfg);
    grid_csv << "h,r_r,d,b1,b2,b3\n";

    for (const auto& path : cdf_files) {
        const auto file = read_cdf_csv(path);
        const Topology topo(file.d, file.h, file.r_r, file.D, cfg.topology.mode);
        const double surf_d = topo.surface_distance();

        std::vector<std::string> links =
            cfg.fit.fit_all_links ? std::vector<std::string>{"F11", "F12", "F21", "F22"}
                                  : std::vector<std::string>{"F11", "F12"};
        for (const auto& link : links) {
            const auto it = file.links.find(link);
            if (it == file.links.end())
                throw std::runtime_error("missing link " + link + " in " + path.string());
            const auto& [t, f] = it->second;
            const auto fit = fit_model(t, f, file.r_r, surf_d, file.D,
                                       cfg.fit.initial_guess);
            table << file.d << ',' << file.h << ',' << file.r_r << ',' << file.D << ','
                  << link << ',' << fit.params.b1 << ',' << fit.params.b2 << ','
                  << fit.params.b3 << ',' << fit.diagnostics.rmse << ','
                  << fit.diagnostics.iterations << ','
                  << (fit.diagnostics.converged ? 1 : 0) << "\n";
            if (link == "F11")
                grid_csv << file.h << ',' << file.r_r << ',' << file.d << ','
                         << fit.params.b1 << ',' << fit.params.b2 << ','
                         << fit.params.b3 << "\n";
        }
    }
}

std::vector<FitTableRow> read_fit_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<FitTableRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("d,", 0) == 0) continue;
        std::istringstream row(line);
        FitTableRow r;
        std::string tok;
        std::getline(row, tok, ','); r.d = std::stod(tok);
        std::getline(row, tok, ','); r.h = std::stod(tok);
        std::getline(row, tok, ','); r.r_r = std::stod(tok);
        std::getline(row, tok, ','); r.D = std::stod(tok);
        std::getline(row, r.link, ',');
        std::getline(row, tok, ','); r.params.b1 = std::stod(tok);
        std::getline(row, tok, ','); r.params.b2 = std::stod(tok);
        std::getline(row, tok, ','); r.params.b3 = std::stod(tok);
        std::getline(row, tok, ','); r.diagnostics.rmse = std::stod(tok);
        std::getline(row, tok, ','); r.diagnostics.iterations = std::stoi(tok);
        std::getline(row, tok, ','); r.diagnostics.converged = std::stoi(tok) != 0;
        rows.push_back(r);
    }
    return rows;
}

ChannelModel model_from_rows(const Topology& topology,
                             const std::vector<FitTableRow>& rows) {
    const ModelParams* own = nullptr;
    const ModelParams* cross = nullptr;
    for (const auto& r : rows) {
        if (r.d != topology.d() || r.h != topology.h() || r.r_r != topology.radius())
            continue;
        if (r.link == "F11") own = &r.params;
        if (r.link == "F12") cross = &r.params;
    }
    if (!own || !cross)
        throw std::runtime_error("fit table has no F11/F12 rows for the topology");
    return ChannelModel{topology, *own, *cross};
}

void cmd_sir(const ExperimentConfig& cfg, const fs::path& fit_table,
             const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto rows = read_fit_table(fit_table);
    auto out = open_output(out_dir / "sir.csv", cfg);
    out << "d,h,r_r,t_s,sir\n";
    for (const auto& topo : cfg.topology.expand()) {
        const auto model = model_from_rows(topo, rows);
        for (double ts : cfg.sweep.sir_t_s)
            out << topo.d() << ',' << topo.h() << ',' << topo.radius() << ',' << ts
                << ',' << sir(model, ts) << "\n";
    }
}

namespace {

std::vector<double> threshold_grid(const SweepConfig& s) {
    std::vector<double> grid;
    for (double eta = s.threshold_lo; eta <= s.threshold_hi + 1e-12;
         eta += s.threshold_step)
        grid.push_back(eta);
    return grid;
}

std::vector<DetectorSpec> build_specs(const ExperimentConfig& cfg,
                                      const LinkConfig& link, const Taps& tp) {
    const auto analytic = analytic_thresholds(tp, link);
    std::vector<DetectorSpec> specs;
    for (auto kind : cfg.sweep.detectors) {
        DetectorSpec spec;
        spec.kind = kind;
        switch (kind) {
            case DetectorKind::fixed:
                spec.single_threshold = cfg.eta_f;
                break;
            case DetectorKind::adaptive:
                spec.thresholds = analytic.adaptive;
                break;
            case DetectorKind::practical_zf:
                spec.thresholds = analytic.practical;
                break;
            case DetectorKind::genie_zf: {
                const auto sweep = sweep_thresholds(link, DetectorKind::genie_zf,
                                                    threshold_grid(cfg.sweep), tp);
                spec.single_threshold = sweep.best_threshold;
                break;
            }
        }
        specs.push_back(spec);
    }
    return specs;
}

}  // namespace

void cmd_ber(const ExperimentConfig& cfg, const fs::path& fit_table,
             const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto rows = read_fit_table(fit_table);
    const auto topologies = cfg.topology.expand();
    const auto model = model_from_rows(topologies.front(), rows);

    auto out = open_output(out_dir / "ber.csv", cfg);
    out << "detector,Q1,t_s,ber_mean,ber_std,n_bits,reps,seed\n";

    auto point = [&](double q1, double ts) {
        LinkConfig link = cfg.link;
        link.q1 = q1;
        link.t_s = ts;
        const Taps tp = taps(model, ts, link.memory);
        const auto specs = build_specs(cfg, link, tp);
        for (const auto& result : run_ber_multi(link, specs, tp))
            out << detector_name(result.kind) << ',' << q1 << ',' << ts << ','
                << result.ber_mean << ',' << result.ber_std << ',' << link.n_bits
                << ',' << link.replications << ',' << link.seed << "\n";
    };

    for (double q1 : cfg.sweep.q1) point(q1, cfg.link.t_s);
    for (double ts : cfg.sweep.t_s) point(cfg.link.q1, ts);

    nlohmann::json meta;
    meta["config_hash"] = cfg.hash();
    meta["seed"] = cfg.seed;
    meta["topology"] = {{"d", topologies.front().d()},
                        {"h", topologies.front().h()},
                        {"r_r", topologies.front().radius()},
                        {"D", topologies.front().diffusion()}};
    meta["own"] = {model.own.b1, model.own.b2, model.own.b3};
    meta["cross"] = {model.cross.b1, model.cross.b2, model.cross.b3};
    meta["q1_sweep"] = cfg.sweep.q1;
    meta["t_s_sweep"] = cfg.sweep.t_s;
    meta["n_bits"] = cfg.link.n_bits;
    meta["replications"] = cfg.link.replications;
    meta["channel_mode"] =
        cfg.link.channel_mode == ChannelMode::binomial_taps ? "binomial-taps"
                                                            : "multinomial";
    std::ofstream meta_out(out_dir / "ber_meta.json");
    meta_out << meta.dump(2) << "\n";
}

void cmd_sweep_thresholds(const ExperimentConfig& cfg, const fs::path& fit_table,
                          const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto rows = read_fit_table(fit_table);
    const auto model = model_from_rows(cfg.topology.expand().front(), rows);
    const Taps tp = taps(model, cfg.link.t_s, cfg.link.memory);
    const auto grid = threshold_grid(cfg.sweep);

    auto out = open_output(out_dir / "thresholds.csv", cfg);
    out << "detector,Q1,t_s,eta,ber\n";
    auto best = open_output(out_dir / "thresholds_best.csv", cfg);
    best << "detector,Q1,t_s,eta_best,ber_best\n";

    for (auto kind : cfg.sweep.detectors) {
        const auto sweep = sweep_thresholds(cfg.link, kind, grid, tp);
        for (std::size_t i = 0; i < sweep.grid.size(); ++i)
            out << detector_name(kind) << ',' << cfg.link.q1 << ',' << cfg.link.t_s
                << ',' << sweep.grid[i] << ',' << sweep.ber[i] << "\n";
        best << detector_name(kind) << ',' << cfg.link.q1 << ',' << cfg.link.t_s << ','
             << sweep.best_threshold << ',' << sweep.best_ber << "\n";
    }
}

}  // namespace mmimo
