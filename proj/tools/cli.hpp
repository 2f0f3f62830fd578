#pragma once

// Command-line driver: synth, forecast, bench, cluster and table.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nmfcast/nmfcast.hpp"

namespace nmfcast::cli {

using json = nlohmann::ordered_json;

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = std::string(detail::trim(item));
        if (item.empty()) {
            continue;
        }
        const auto v = detail::parse_number(item);
        if (!v || *v < 0.0 || (std::is_integral_v<T> && *v != static_cast<double>(static_cast<std::uint64_t>(*v)))) {
            throw ConfigError(std::string("invalid value '") + item + "' in " + what);
        }
        out.push_back(static_cast<T>(*v));
    }
    if (out.empty()) {
        throw ConfigError(std::string(what) + " is empty");
    }
    return out;
}

inline json report_to_json(const ForecastReport& r, std::size_t n_series) {
    json j;
    j["method"] = r.method;
    j["status"] = "ok";
    j["n_series"] = n_series;
    j["horizon"] = r.forecast.cols();
    if (r.rrmse) j["rrmse"] = *r.rrmse;
    if (r.rmpe) j["rmpe"] = *r.rmpe;
    j["wall_seconds"] = r.wall_seconds;
    j["clamped_cells"] = r.clamped_cells;
    for (const auto& [k, v] : r.hyperparameters) {
        j["param." + k] = v;
    }
    if (!r.diagnostics.empty()) {
        const SolverDiagnostics& d = r.diagnostics.front();
        j["solver"] = d.solver;
        j["iterations"] = d.iterations;
        j["converged"] = d.converged;
        j["stop_reason"] = d.stop_reason;
        j["final_objective"] = d.final_objective;
        j["kkt_residual"] = d.kkt_residual;
        j["inertial_restarts"] = d.inertial_restarts;
        j["dead_column_resets"] = d.dead_column_resets;
    }
    if (!r.cv_scores.empty()) {
        json cv = json::array();
        for (const CandidateScore& s : r.cv_scores) {
            json c;
            c["K"] = s.candidate.rank;
            c["W"] = s.candidate.window;
            c["lambda"] = s.candidate.lambda;
            c["P"] = s.candidate.period;
            c["S"] = s.candidate.stride;
            if (s.error.empty()) {
                c["score"] = s.score;
            } else {
                c["error"] = s.error;
            }
            cv.push_back(c);
        }
        j["cv_scores"] = cv;
    }
    if (!r.notes.empty()) {
        j["notes"] = r.notes;
    }
    return j;
}

inline json not_built_report(const std::string& method) {
    json j;
    j["method"] = method;
    j["status"] = "not built";
    return j;
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out << j.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("'" + path + "' is not a valid report: " + e.what());
    }
}

inline std::string percent(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * v << '%';
    return s.str();
}

/// Algorithm / RRMSE / RMPE / CPU table built only from report documents.
/// Hyperparameters (K, W) follow the error as in "5.15%(4,5)".
inline std::string metrics_table(const std::vector<json>& reports) {
    std::vector<std::vector<std::string>> rows{{"Algorithm", "RRMSE", "RMPE", "CPU (s)"}};
    for (const json& r : reports) {
        const std::string method = r.value("method", "?");
        if (r.value("status", "ok") != "ok") {
            rows.push_back({method, r.value("status", "?"), r.value("status", "?"), "-"});
            continue;
        }
        std::string suffix;
        if (r.contains("param.K") && r.contains("param.W")) {
            suffix = "(" + std::to_string(r["param.K"].get<long long>()) + "," +
                     std::to_string(r["param.W"].get<long long>()) + ")";
        }
        const std::string e1 = r.contains("rrmse") ? percent(r["rrmse"].get<double>()) + suffix : "n/a";
        const std::string e2 = r.contains("rmpe") ? percent(r["rmpe"].get<double>()) + suffix : "n/a";
        std::ostringstream cpu;
        cpu << std::fixed << std::setprecision(2) << r.value("wall_seconds", 0.0);
        rows.push_back({method, e1, e2, cpu.str()});
    }
    std::vector<std::size_t> width(4, 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < 4; ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        out << '|';
        for (std::size_t c = 0; c < 4; ++c) {
            out << ' ' << std::left << std::setw(static_cast<int>(width[c])) << row[c] << " |";
        }
        out << '\n';
    };
    emit(rows.front());
    out << '|';
    for (std::size_t c = 0; c < 4; ++c) {
        out << std::string(width[c] + 2, '-') << '|';
    }
    out << '\n';
    for (std::size_t i = 1; i < rows.size(); ++i) {
        emit(rows[i]);
    }
    return out.str();
}

struct SmmFlags {
    std::string program = "mNMF";
    std::string solver;
    std::string rank_grid = "10,20";
    std::string window_grid = "5";
    std::string lambda_grid = "0.1";
    std::size_t period = 10;
    std::size_t stride = 1;
};

struct LcfFlags {
    std::size_t rank = 10;
    std::size_t cluster_rank = 3;
    std::size_t cluster_max = 0;  ///< 0: use the rank
    std::string regressor = "lag-ls";
    std::size_t lag_window = 10;
    double ridge = 1e-3;
};

struct CommonFlags {
    std::size_t horizon = 10;
    std::uint64_t seed = 0;
    std::size_t max_iters = 500;
    std::optional<std::size_t> subsample_rows;
    std::optional<std::size_t> subsample_cols;
    std::size_t workers = 0;
};

inline SolverConfig solver_config(const CommonFlags& c) {
    SolverConfig sc;
    sc.seed = c.seed;
    sc.max_iters = c.max_iters;
    sc.subsample_rows = c.subsample_rows;
    sc.subsample_cols = c.subsample_cols;
    return sc;
}

inline SmmConfig smm_config(const SmmFlags& f, const CommonFlags& c, std::optional<Program> program = std::nullopt) {
    SmmConfig cfg;
    cfg.program = program ? *program : parse_program(f.program);
    if (!f.solver.empty()) {
        cfg.solver = parse_solver_kind(f.solver);
    }
    cfg.ranks = parse_list<std::size_t>(f.rank_grid, "--rank-grid");
    for (std::size_t w : parse_list<std::size_t>(f.window_grid, "--window-grid")) {
        cfg.geometries.push_back({f.period, w, f.stride});
    }
    cfg.lambdas = parse_list<double>(f.lambda_grid, "--lambda-grid");
    cfg.solver_config = solver_config(c);
    cfg.max_workers = c.workers;
    cfg.validate();
    return cfg;
}

inline LcfConfig lcf_config(const LcfFlags& f, const CommonFlags& c) {
    LcfConfig cfg;
    cfg.rank = f.rank;
    cfg.cluster_rank = f.cluster_rank;
    if (f.cluster_max > 0) {
        cfg.max_cluster_size = f.cluster_max;
    }
    cfg.regressor.kind = parse_regressor_kind(f.regressor);
    cfg.regressor.window = f.lag_window;
    cfg.regressor.ridge = f.ridge;
    cfg.solver_config = solver_config(c);
    cfg.max_workers = c.workers;
    return cfg;
}

inline void add_common(CLI::App* app, CommonFlags& c) {
    app->add_option("--horizon", c.horizon, "Timestamps to forecast (F)")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "Random seed");
    app->add_option("--max-iters", c.max_iters, "Solver iteration cap");
    app->add_option("--subsample-rows", c.subsample_rows, "Rows sampled per H update");
    app->add_option("--subsample-cols", c.subsample_cols, "Columns sampled per W update");
    app->add_option("--workers", c.workers, "Concurrent solves (0: hardware concurrency)");
}

inline void add_smm(CLI::App* app, SmmFlags& f) {
    app->add_option("--program", f.program, "mNMF or mAMF");
    app->add_option("--solver", f.solver, "als, hals, palm or ipalm");
    app->add_option("--rank-grid", f.rank_grid, "Comma-separated ranks K");
    app->add_option("--window-grid", f.window_grid, "Comma-separated windows W (blocks)");
    app->add_option("--lambda-grid", f.lambda_grid, "Comma-separated archetypal penalties");
    app->add_option("--period", f.period, "Block length P")->check(CLI::PositiveNumber);
    app->add_option("--stride", f.stride, "Blocks between row groups S")->check(CLI::PositiveNumber);
}

inline void add_lcf(CLI::App* app, LcfFlags& f) {
    app->add_option("--rank", f.rank, "Rank K0 of the clustering factorization")->check(CLI::PositiveNumber);
    app->add_option("--cluster-rank", f.cluster_rank, "Rank of each cluster")->check(CLI::PositiveNumber);
    app->add_option("--cluster-max", f.cluster_max, "Maximal cluster size d (0: the rank)");
    app->add_option("--regressor", f.regressor, "lag-ls or exs");
    app->add_option("--lag-window", f.lag_window, "Lagged inputs D")->check(CLI::PositiveNumber);
    app->add_option("--ridge", f.ridge, "Ridge penalty of lag-ls");
}

inline std::vector<std::string> future_labels(std::size_t horizon) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= horizon; ++i) {
        out.push_back("t+" + std::to_string(i));
    }
    return out;
}

/// Splits the last `horizon` timestamps off as the realized future.
inline std::pair<SeriesMatrix, Matrix> hold_out(const SeriesMatrix& m, std::size_t horizon) {
    const auto f = static_cast<Index>(horizon);
    if (f >= m.values.cols()) {
        throw GeometryError("cannot hold out " + std::to_string(horizon) + " of " + std::to_string(m.values.cols()) +
                            " timestamps");
    }
    SeriesMatrix past;
    past.values = m.values.leftCols(m.values.cols() - f);
    past.series_ids = m.series_ids;
    if (!m.timestamp_labels.empty()) {
        past.timestamp_labels.assign(m.timestamp_labels.begin(), m.timestamp_labels.end() - f);
    }
    return {past, m.values.rightCols(f)};
}

inline ForecastReport exs_report(const SeriesMatrix& m, std::size_t horizon) {
    const auto t0 = std::chrono::steady_clock::now();
    ForecastReport r;
    r.method = "EXS";
    r.forecast = baseline_exs(m, horizon);
    r.hyperparameters = {{"F", static_cast<double>(horizon)}};
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Forecasting nonnegative time series by masked matrix factorization"};
    app.set_config("--config", "", "Read flags from a TOML/INI file");
    app.require_subcommand(1);

    CommonFlags common;
    SmmFlags smm;
    LcfFlags lcf;

    SyntheticSpec synth_spec;
    synth_spec.n_base = 500;
    synth_spec.base_length = 10;
    synth_spec.replications = 10;
    synth_spec.noise = 0.005;
    std::string synth_out;
    CLI::App* synth = app.add_subcommand("synth", "Generate a replicated-noise synthetic dataset");
    synth->add_option("--n-base", synth_spec.n_base, "Base series")->check(CLI::PositiveNumber);
    synth->add_option("--base-length", synth_spec.base_length, "Length of each base series")->check(CLI::PositiveNumber);
    synth->add_option("--replications", synth_spec.replications, "Repetitions along time")->check(CLI::PositiveNumber);
    synth->add_option("--noise", synth_spec.noise, "Noise level sigma")->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", synth_spec.seed, "Random seed");
    synth->add_option("--output", synth_out, "Output CSV")->required();

    std::string fc_input;
    std::string fc_method = "smm";
    std::string fc_output;
    std::string fc_report;
    std::string fc_truth;
    bool fc_holdout = false;
    CLI::App* forecast = app.add_subcommand("forecast", "Forecast the next F timestamps of every series");
    forecast->add_option("--input", fc_input, "Input CSV (rows are series)")->required();
    forecast->add_option("--method", fc_method, "smm or lcf");
    forecast->add_option("--output", fc_output, "Forecast CSV")->required();
    forecast->add_option("--report", fc_report, "Report file (default: <output>.report.json)");
    forecast->add_option("--truth", fc_truth, "CSV with the realized future, for scoring");
    forecast->add_flag("--holdout", fc_holdout, "Treat the last F input timestamps as the future and score on them");
    add_common(forecast, common);
    add_smm(forecast, smm);
    add_lcf(forecast, lcf);

    std::string bench_input;
    std::string bench_dir = "bench_reports";
    std::string bench_table;
    CLI::App* bench = app.add_subcommand("bench", "Score SMM, LCF and the baselines on the last F timestamps");
    bench->add_option("--input", bench_input, "Input CSV")->required();
    bench->add_option("--report-dir", bench_dir, "Directory for the per-method reports");
    bench->add_option("--output", bench_table, "Also write the metrics table to this file");
    add_common(bench, common);
    add_smm(bench, smm);
    add_lcf(bench, lcf);

    std::string cl_input;
    std::string cl_output;
    CLI::App* cluster = app.add_subcommand("cluster", "Cluster series through the rows of a factorization");
    cluster->add_option("--input", cl_input, "Input CSV")->required();
    cluster->add_option("--output", cl_output, "Output CSV (series,cluster)")->required();
    add_common(cluster, common);
    add_lcf(cluster, lcf);

    std::vector<std::string> table_inputs;
    CLI::App* table = app.add_subcommand("table", "Print the metrics table of report files");
    table->add_option("reports", table_inputs, "Report files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (synth->parsed()) {
            const SyntheticData d = generate_synthetic(synth_spec);
            save_dataset(synth_out, d.series);
            out << "wrote " << d.series.values.rows() << " x " << d.series.values.cols() << " to " << synth_out;
            if (d.clamped_cells > 0) {
                out << " (" << d.clamped_cells << " cells clamped at 0)";
            }
            out << '\n';
            return 0;
        }

        if (forecast->parsed()) {
            SeriesMatrix data = load_dataset(fc_input);
            std::optional<Matrix> truth;
            if (fc_holdout) {
                auto [past, fut] = hold_out(data, common.horizon);
                data = std::move(past);
                truth = std::move(fut);
            } else if (!fc_truth.empty()) {
                truth = load_dataset(fc_truth).values;
            }
            ForecastReport r;
            if (fc_method == "smm") {
                r = smm_forecast(data, common.horizon, smm_config(smm, common));
            } else if (fc_method == "lcf") {
                r = lcf_forecast(data, common.horizon, lcf_config(lcf, common));
            } else {
                throw ConfigError("unknown method '" + fc_method + "' (expected smm or lcf)");
            }
            if (truth) {
                r.score(*truth);
            }
            save_forecast(fc_output, r.forecast, data.series_ids, future_labels(common.horizon));
            const std::string report_path = fc_report.empty() ? fc_output + ".report.json" : fc_report;
            write_json(report_path, report_to_json(r, static_cast<std::size_t>(data.values.rows())));
            out << r.method << ": wrote " << r.forecast.rows() << " x " << r.forecast.cols() << " forecast to "
                << fc_output << ", report " << report_path << '\n';
            return 0;
        }

        if (bench->parsed()) {
            const SeriesMatrix data = load_dataset(bench_input);
            const auto [past, truth] = hold_out(data, common.horizon);
            std::filesystem::create_directories(bench_dir);
            const auto n = static_cast<std::size_t>(past.values.rows());
            std::vector<std::string> paths;
            auto emit = [&](const std::string& file, const json& j) {
                const std::string path = (std::filesystem::path(bench_dir) / file).string();
                write_json(path, j);
                paths.push_back(path);
            };
            auto scored = [&](ForecastReport r) {
                r.score(truth);
                return report_to_json(r, n);
            };
            emit("smm_mnmf.json", scored(smm_forecast(past, common.horizon, smm_config(smm, common, Program::mnmf))));
            emit("smm_mamf.json", scored(smm_forecast(past, common.horizon, smm_config(smm, common, Program::mamf))));
            emit("lcf.json", scored(lcf_forecast(past, common.horizon, lcf_config(lcf, common))));
            emit("exs.json", scored(exs_report(past, common.horizon)));
            emit("rfr.json", not_built_report("RFR"));

            std::vector<json> reports;
            for (const std::string& p : paths) {
                reports.push_back(read_json(p));
            }
            const std::string tab = metrics_table(reports);
            out << tab;
            if (!bench_table.empty()) {
                std::ofstream t(bench_table);
                t << tab;
                if (!t) {
                    throw Error("cannot write '" + bench_table + "'");
                }
            }
            return 0;
        }

        if (cluster->parsed()) {
            const SeriesMatrix data = load_dataset(cl_input);
            const LcfConfig cfg = lcf_config(lcf, common);
            const Factorization f = lcf_initial_factorization(data.values, cfg);
            const auto clusters = lcf_clusters(f.W, cfg.cluster_limit());
            std::vector<std::size_t> label(static_cast<std::size_t>(data.values.rows()), 0);
            for (std::size_t c = 0; c < clusters.size(); ++c) {
                for (Index i : clusters[c]) {
                    label[static_cast<std::size_t>(i)] = c;
                }
            }
            std::ofstream o(cl_output);
            if (!o) {
                throw Error("cannot write '" + cl_output + "'");
            }
            o << "series,cluster\n";
            for (std::size_t i = 0; i < label.size(); ++i) {
                o << (data.series_ids.empty() ? std::to_string(i) : data.series_ids[i]) << ',' << label[i] << '\n';
            }
            out << "wrote " << clusters.size() << " clusters to " << cl_output << '\n';
            return 0;
        }

        if (table->parsed()) {
            std::vector<json> reports;
            for (const std::string& p : table_inputs) {
                reports.push_back(read_json(p));
            }
            out << metrics_table(reports);
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace nmfcast::cli
