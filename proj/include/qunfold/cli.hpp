// Copyright 2026 The qunfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The `qunfold` command-line front end.
//
// Every subcommand writes its primary output to --out and a run manifest to
// <out>.manifest.json holding the resolved parameters, the tool version and
// SHA-256 digests of all input files. The manifest has no timestamps, so two
// runs with equal manifests produce byte-equal files.
//
// Exit codes: 0 success, 2 bad input or usage, 3 numerical failure. Errors
// are reported as a single line on stderr:
//   error: code=<Code> message=<text>

#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qunfold/io.hpp"
#include "qunfold/qunfold.hpp"

namespace qunfold::cli {

inline constexpr const char *kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

using io::json;

inline std::string sha256_hex(const std::string &bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    require(EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) == 1,
            ErrorCode::InvalidArgument, "SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

namespace detail {

// Options whose value names an input file that goes into the manifest digests.
inline const std::set<std::string> &input_options() {
    static const std::set<std::string> names{"response", "measured", "counts",    "calibration",
                                             "noise-model", "vector", "truth-counts", "alternate",
                                             "prior"};
    return names;
}

inline std::string one_line(std::string s) {
    for (char &c : s) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return s;
}

inline void report_error(std::ostream &err, const std::string &code, const std::string &message) {
    err << "error: code=" << code << " message=" << one_line(message) << '\n';
}

inline std::vector<double> read_values(const std::string &path) { return io::values_from_json(io::read_json(path)); }

/// "uniform" or a path to a vector file.
inline std::optional<ProbabilityVector> read_prior(const std::string &spec) {
    if (spec == "uniform") {
        return std::nullopt;
    }
    return ProbabilityVector(read_values(spec));
}

inline void require_seed(const std::optional<std::uint64_t> &seed, const std::string &what) {
    require(seed.has_value(), ErrorCode::InvalidArgument, what + " is stochastic: --seed is required");
}

}  // namespace detail

/// Parameters shared by every subcommand that unfolds.
struct UnfoldOptions {
    std::string method = "ibu";
    int iterations = 10;
    std::string prior = "uniform";
    double ls_tolerance = 1e-8;
    int ls_max_iterations = 100000;

    void add(CLI::App *app, bool iterations_flag = true) {
        app->add_option("--method", method, "Estimator: inversion, ls or ibu")
            ->check(CLI::IsMember({"inversion", "ls", "ibu", "matrix", "least_squares", "ignis"}))
            ->capture_default_str();
        if (iterations_flag) {
            app->add_option("--iterations", iterations, "IBU iteration count")->capture_default_str();
        }
        app->add_option("--prior", prior, "IBU prior: 'uniform' or a vector JSON file")->capture_default_str();
        app->add_option("--ls-tol", ls_tolerance, "Least-squares relative tolerance")->capture_default_str();
        app->add_option("--ls-max-iter", ls_max_iterations, "Least-squares iteration cap")->capture_default_str();
    }

    UnfoldConfig config() const {
        UnfoldConfig cfg;
        cfg.method = parse_method(method);
        cfg.iterations = iterations;
        cfg.prior = detail::read_prior(prior);
        cfg.ls_tolerance = ls_tolerance;
        cfg.ls_max_iterations = ls_max_iterations;
        cfg.check();
        return cfg;
    }
};

/// Resolved parameters and input digests of one subcommand invocation.
inline json manifest(const CLI::App &sub) {
    json m;
    m["schema"] = io::kSchema;
    m["tool"] = "qunfold";
    m["version"] = kVersion;
    m["subcommand"] = sub.get_name();
    json params = json::object();
    json inputs = json::object();
    for (const CLI::Option *opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "threads") {
            continue;
        }
        json value;
        if (opt->count() > 0) {
            const auto &res = opt->results();
            if (opt->get_type_size() == 0) {
                value = true;
            } else if (res.size() == 1) {
                value = res.front();
            } else {
                value = res;
            }
        } else if (!opt->get_default_str().empty()) {
            value = opt->get_default_str();
        } else {
            value = nullptr;
        }
        params[name] = value;
        if (opt->count() > 0 && detail::input_options().count(name) && value.is_string()) {
            const auto path = value.get<std::string>();
            if (std::filesystem::is_regular_file(path)) {
                inputs[name] = {{"path", path}, {"sha256", sha256_hex(io::read_text(path))}};
            }
        }
    }
    m["parameters"] = std::move(params);
    m["inputs"] = std::move(inputs);
    return m;
}

inline void write_manifest(const CLI::App &sub, const std::string &out) {
    io::write_json(out + ".manifest.json", manifest(sub));
}

inline int run(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    CLI::App app{"Readout-error unfolding for quantum measurement histograms", "qunfold"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1, 1);
    app.fallthrough();
    int threads = 1;
    app.add_option("--threads", threads, "Worker threads (results do not depend on this)")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();

    std::string out_path;
    std::optional<std::uint64_t> seed;
    auto add_out = [&](CLI::App *s) { s->add_option("--out", out_path, "Output file")->required(); };
    auto add_seed = [&](CLI::App *s) { s->add_option("--seed", seed, "Random seed (64-bit)"); };

    // gen-truth -------------------------------------------------------------
    std::string truth_kind = "gaussian";
    int qubits = 5;
    std::size_t bins = 21;
    std::optional<double> sigma;
    std::optional<std::int64_t> truth_shots;
    auto *gen = app.add_subcommand("gen-truth", "Generate a truth spectrum, optionally sampled into counts");
    gen->add_option("--truth", truth_kind, "gaussian, w_state or binned_gaussian")
        ->check(CLI::IsMember({"gaussian", "w_state", "w", "binned_gaussian"}))
        ->capture_default_str();
    gen->add_option("--qubits", qubits, "Number of qubits")->capture_default_str();
    gen->add_option("--bins", bins, "Bin count (binned_gaussian)")->capture_default_str();
    gen->add_option("--sigma", sigma, "Width (default 3.5, or 3 for binned_gaussian)");
    gen->add_option("--shots", truth_shots, "Sample this many shots into a count vector");
    add_seed(gen);
    add_out(gen);

    // fold ------------------------------------------------------------------
    std::string response_path;
    std::string vector_path;
    auto *fold_cmd = app.add_subcommand("fold", "Fold a truth vector with a response matrix: m = R t");
    fold_cmd->add_option("--response", response_path, "Response matrix JSON")->required();
    fold_cmd->add_option("--vector", vector_path, "Truth vector JSON")->required();
    add_out(fold_cmd);

    // apply-noise -----------------------------------------------------------
    std::string counts_path;
    auto *noise_cmd = app.add_subcommand("apply-noise", "Apply sampled readout noise to true counts");
    noise_cmd->add_option("--response", response_path, "Response matrix JSON")->required();
    noise_cmd->add_option("--counts", counts_path, "True count vector JSON")->required();
    add_seed(noise_cmd);
    add_out(noise_cmd);

    // calibrate -------------------------------------------------------------
    std::string calibration_path;
    std::string noise_model_path;
    std::optional<double> p01;
    std::optional<double> p10;
    bool simulate = false;
    std::int64_t shots_per_state = 8192;
    auto *cal = app.add_subcommand("calibrate", "Build a response matrix, or simulate calibration data");
    cal->add_option("--calibration", calibration_path, "Calibration histograms JSON -> response matrix");
    cal->add_option("--noise-model", noise_model_path, "Noise model JSON -> response matrix");
    cal->add_option("--p01", p01, "Uniform 0->1 rate (with --p10 and --qubits)");
    cal->add_option("--p10", p10, "Uniform 1->0 rate (with --p01 and --qubits)");
    cal->add_option("--qubits", qubits, "Number of qubits for the uniform model")->capture_default_str();
    cal->add_flag("--simulate", simulate, "Sample calibration histograms from --response");
    cal->add_option("--response", response_path, "Response matrix JSON (with --simulate)");
    cal->add_option("--shots-per-state", shots_per_state, "Shots per calibration circuit")->capture_default_str();
    add_seed(cal);
    add_out(cal);

    // unfold ----------------------------------------------------------------
    std::string measured_path;
    UnfoldOptions uopt;
    auto *unf = app.add_subcommand("unfold", "Unfold a measured histogram");
    unf->add_option("--response", response_path, "Response matrix JSON")->required();
    unf->add_option("--measured", measured_path, "Measured vector JSON")->required();
    uopt.add(unf);
    add_out(unf);

    // fit-noise -------------------------------------------------------------
    std::string csv_path;
    auto *fit = app.add_subcommand("fit-noise", "Fit universal and per-qubit flip rates to a response matrix");
    fit->add_option("--response", response_path, "Response matrix JSON")->required();
    fit->add_option("--csv", csv_path, "Also write plot-ready CSV here");
    add_out(fit);

    // bootstrap / scan shared -----------------------------------------------
    std::vector<int> iteration_list;
    int replicas = 100;
    double lambda = 0.0;
    std::string alternate_path;
    std::string truth_counts_path;
    std::string report_path;

    auto *boot = app.add_subcommand("bootstrap", "Bootstrap uncertainty components for one estimator");
    boot->add_option("--response", response_path, "Response matrix JSON (default: built from --calibration)");
    boot->add_option("--calibration", calibration_path, "Calibration JSON; enables the stat_R column");
    boot->add_option("--measured", measured_path, "Measured count vector JSON")->required();
    UnfoldOptions bopt;
    bopt.add(boot, false);
    boot->add_option("--iterations", iteration_list, "IBU iteration counts, comma separated")
        ->delimiter(',')
        ->default_str("10");
    boot->add_option("--replicas", replicas, "Bootstrap replicas B")->capture_default_str();
    boot->add_option("--lambda", lambda, "Extra flip rate for the systematic (0 disables)")->capture_default_str();
    boot->add_option("--alternate", alternate_path, "Alternate response JSON for the systematic");
    boot->add_option("--truth-counts", truth_counts_path, "Known truth counts; enables bias and mse");
    add_seed(boot);
    add_out(boot);

    auto *scan = app.add_subcommand("scan", "IBU uncertainty and bias scan over iteration counts");
    scan->add_option("--calibration", calibration_path, "Calibration histograms JSON")->required();
    scan->add_option("--response", response_path, "Nominal response JSON (default: built from --calibration)");
    scan->add_option("--measured", measured_path, "Measured count vector JSON")->required();
    UnfoldOptions sopt;
    sopt.add(scan, false);
    scan->add_option("--iterations", iteration_list, "Iteration counts, comma separated")
        ->delimiter(',')
        ->default_str("1,2,3,4,5,10,20,50,100");
    scan->add_option("--replicas", replicas, "Bootstrap replicas B")->capture_default_str();
    double scan_lambda = 0.01;
    scan->add_option("--lambda", scan_lambda, "Extra flip rate for the systematic (0 disables)")
        ->capture_default_str();
    scan->add_option("--alternate", alternate_path, "Alternate response JSON for the systematic");
    scan->add_option("--truth-counts", truth_counts_path, "Known truth counts; enables bias and mse");
    scan->add_option("--report", report_path, "Also write per-state reports as JSON here");
    add_seed(scan);
    add_out(scan);

    // pseudo ----------------------------------------------------------------
    std::int64_t shots = 10000;
    int experiments = 1000;
    std::vector<std::string> methods;
    std::string reference = "sampled";
    std::string summary_path;
    double pseudo_p01 = 0.032;
    double pseudo_p10 = 0.075;
    auto *pseudo = app.add_subcommand("pseudo", "Pseudo-experiment study of estimator spread");
    pseudo->add_option("--truth", truth_kind, "gaussian, w_state or binned_gaussian")
        ->check(CLI::IsMember({"gaussian", "w_state", "w", "binned_gaussian"}))
        ->capture_default_str();
    pseudo->add_option("--qubits", qubits, "Number of qubits")->capture_default_str();
    pseudo->add_option("--bins", bins, "Bin count (binned_gaussian)")->capture_default_str();
    pseudo->add_option("--sigma", sigma, "Width (default 3.5, or 3 for binned_gaussian)");
    pseudo->add_option("--shots", shots, "Shots per experiment")->capture_default_str();
    pseudo->add_option("--experiments", experiments, "Number of pseudo-experiments")->capture_default_str();
    pseudo->add_option("--methods", methods, "Estimators, comma separated")
        ->delimiter(',')
        ->default_str("inversion,ls,ibu");
    UnfoldOptions popt;
    popt.iterations = 100;
    popt.add(pseudo);
    pseudo->remove_option(pseudo->get_option("--method"));
    pseudo->add_option("--reference", reference, "Compare against 'sampled' truth or 'theoretical'")
        ->check(CLI::IsMember({"sampled", "theoretical"}))
        ->capture_default_str();
    pseudo->add_option("--response", response_path, "Response JSON (default: uniform --p01/--p10 model)");
    pseudo->add_option("--p01", pseudo_p01, "Uniform 0->1 rate of the synthetic response")->capture_default_str();
    pseudo->add_option("--p10", pseudo_p10, "Uniform 1->0 rate of the synthetic response")->capture_default_str();
    pseudo->add_option("--summary", summary_path, "Per-method summary CSV (default: <out>.summary.csv)");
    add_seed(pseudo);
    add_out(pseudo);

    // examples --------------------------------------------------------------
    std::string example_name;
    double eps = 0.25;
    auto *ex = app.add_subcommand("examples", "Write the analytic two-level or tridiagonal response matrix");
    ex->add_option("--name", example_name, "two_level (alias eq1) or tridiagonal (alias eq2)")
        ->check(CLI::IsMember({"two_level", "tridiagonal", "eq1", "eq2"}))
        ->required();
    ex->add_option("--bins", bins, "Bin count (tridiagonal)")->capture_default_str();
    ex->add_option("--eps", eps, "Migration probability in (0, 1/2)")->capture_default_str();
    add_out(ex);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        detail::report_error(err, "UsageError", e.what());
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitInput;
    }

    CLI::App *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        if (sub == gen) {
            TruthSpec spec;
            spec.kind = parse_truth_kind(truth_kind);
            spec.n_qubits = qubits;
            spec.n_bins = bins;
            spec.sigma = sigma.value_or(spec.kind == TruthKind::BinnedGaussian ? 3.0 : 3.5);
            const auto t = spec.distribution();
            if (truth_shots) {
                detail::require_seed(seed, "gen-truth --shots");
                io::write_json(out_path, io::to_json(sample_counts(t, *truth_shots, *seed)));
            } else {
                io::write_json(out_path, io::to_json(t));
            }
        } else if (sub == fold_cmd) {
            const auto r = io::response_from_json(io::read_json(response_path));
            const auto t = detail::read_values(vector_path);
            require(t.size() == r.size(), ErrorCode::DimensionMismatch, "vector length differs from response side");
            io::write_json(out_path, io::vector_to_json(fold_signed(r, t)));
        } else if (sub == noise_cmd) {
            detail::require_seed(seed, "apply-noise");
            const auto r = io::response_from_json(io::read_json(response_path));
            const auto t = io::counts_from_json(io::read_json(counts_path));
            io::write_json(out_path, io::to_json(apply_readout_noise(r, t, *seed)));
        } else if (sub == cal) {
            const int sources = static_cast<int>(!calibration_path.empty()) +
                                static_cast<int>(!noise_model_path.empty()) +
                                static_cast<int>(p01.has_value() || p10.has_value()) + static_cast<int>(simulate);
            require(sources == 1, ErrorCode::InvalidArgument,
                    "calibrate needs exactly one of --calibration, --noise-model, --p01/--p10, --simulate");
            if (simulate) {
                detail::require_seed(seed, "calibrate --simulate");
                require(!response_path.empty(), ErrorCode::InvalidArgument, "--simulate needs --response");
                const auto r = io::response_from_json(io::read_json(response_path), false);
                io::write_json(out_path, io::to_json(simulate_calibration(r, shots_per_state, *seed)));
            } else if (!calibration_path.empty()) {
                const auto c = io::calibration_from_json(io::read_json(calibration_path));
                io::write_json(out_path, io::to_json(build_from_calibration(c)));
            } else if (!noise_model_path.empty()) {
                const auto nm = io::noise_model_from_json(io::read_json(noise_model_path));
                io::write_json(out_path, io::to_json(from_noise_model(nm)));
            } else {
                require(p01.has_value() && p10.has_value(), ErrorCode::InvalidArgument,
                        "--p01 and --p10 must be given together");
                require(qubits >= 1 && qubits <= kMaxQubits, ErrorCode::InvalidArgument, "qubits out of range");
                io::write_json(out_path, io::to_json(from_noise_model(NoiseModel::uniform(qubits, *p01, *p10))));
            }
        } else if (sub == unf) {
            const auto r = io::response_from_json(io::read_json(response_path));
            const ProbabilityVector m(detail::read_values(measured_path));
            io::write_json(out_path, io::to_json(unfold(r, m, uopt.config())));
        } else if (sub == fit) {
            const auto r = io::response_from_json(io::read_json(response_path), false);
            const auto global = fit_global(r);
            const auto per_qubit = fit_per_qubit(r);
            json doc;
            doc["schema"] = io::kSchema;
            doc["n_qubits"] = r.n_qubits();
            doc["global"] = io::fit_to_json(global);
            doc["per_qubit"] = io::fit_to_json(per_qubit);
            json cond = json::object();
            std::string csv = "series,qubit,context,p01,p10\n";
            csv += "global,-1,-1," + io::format_double(global.p01[0]) + "," + io::format_double(global.p10[0]) + "\n";
            for (int q = 0; q < r.n_qubits(); ++q) {
                const auto qs = std::to_string(q);
                csv += "per_qubit," + qs + ",-1," + io::format_double(per_qubit.p01[static_cast<std::size_t>(q)]) +
                       "," + io::format_double(per_qubit.p10[static_cast<std::size_t>(q)]) + "\n";
            }
            for (int q = 0; q < r.n_qubits(); ++q) {
                const auto ct = conditioned_transitions(r, q);
                cond[std::to_string(q)] = {{"p01_list", ct.p01_list}, {"p10_list", ct.p10_list}};
                for (std::size_t c = 0; c < ct.p01_list.size(); ++c) {
                    csv += "conditioned," + std::to_string(q) + "," + std::to_string(c) + "," +
                           io::format_double(ct.p01_list[c]) + "," + io::format_double(ct.p10_list[c]) + "\n";
                }
            }
            doc["conditioned"] = std::move(cond);
            io::write_json(out_path, doc);
            if (!csv_path.empty()) {
                io::write_text(csv_path, csv);
            }
        } else if (sub == boot) {
            detail::require_seed(seed, "bootstrap");
            std::optional<CalibrationData> calib;
            if (!calibration_path.empty()) {
                calib = io::calibration_from_json(io::read_json(calibration_path));
            }
            require(!response_path.empty() || calib, ErrorCode::InvalidArgument,
                    "bootstrap needs --response or --calibration");
            const auto r = response_path.empty() ? build_from_calibration(*calib)
                                                 : io::response_from_json(io::read_json(response_path));
            const auto m = io::counts_from_json(io::read_json(measured_path));
            const ProbabilityVector measured(m);
            std::optional<ResponseMatrix> alt;
            if (!alternate_path.empty()) {
                alt = io::response_from_json(io::read_json(alternate_path));
            } else if (lambda > 0.0) {
                alt = perturb_response(r, lambda);
            }
            std::optional<std::vector<double>> truth;
            if (!truth_counts_path.empty()) {
                truth = io::counts_from_json(io::read_json(truth_counts_path)).as_doubles();
            }
            auto cfg = bopt.config();
            std::vector<int> ns = iteration_list.empty() ? std::vector<int>{10} : iteration_list;
            if (cfg.method != Method::Ibu) {
                ns = {0};
            }
            ScanTable table;
            for (int n : ns) {
                if (cfg.method == Method::Ibu) {
                    cfg.iterations = n;
                    cfg.check();
                }
                UncertaintyReport rep;
                rep.iterations = n;
                rep.per_state.resize(r.size());
                const auto sm = bootstrap_measurement(r, m, cfg, replicas, *seed, threads);
                std::vector<double> sr(r.size(), 0.0), nc(r.size(), 0.0), sys(r.size(), 0.0);
                if (calib) {
                    sr = bootstrap_response(*calib, m, cfg, replicas, *seed, threads);
                }
                if (cfg.method == Method::Ibu) {
                    nc = nonclosure(r, measured, cfg);
                }
                if (alt) {
                    sys = systematic_response(r, *alt, measured, cfg);
                }
                for (std::size_t i = 0; i < r.size(); ++i) {
                    rep.per_state[i] = {sm[i], sr[i], nc[i], sys[i]};
                }
                summarize(rep);
                ScanRow row;
                row.iterations = n;
                row.report = std::move(rep);
                if (truth) {
                    require(truth->size() == r.size(), ErrorCode::DimensionMismatch, "truth length differs");
                    row.truth_comparison = qunfold::detail::compare_to_truth(unfold(r, measured, cfg).estimate, *truth);
                }
                table.rows.push_back(std::move(row));
            }
            io::write_text(out_path, io::scan_csv(table));
        } else if (sub == scan) {
            detail::require_seed(seed, "scan");
            const auto calib = io::calibration_from_json(io::read_json(calibration_path));
            const auto r = response_path.empty() ? build_from_calibration(calib)
                                                 : io::response_from_json(io::read_json(response_path));
            const auto m = io::counts_from_json(io::read_json(measured_path));
            UncertaintyScanConfig cfg;
            if (!iteration_list.empty()) {
                cfg.iterations = iteration_list;
            }
            cfg.replicas = replicas;
            cfg.seed = *seed;
            cfg.lambda = scan_lambda;
            if (!alternate_path.empty()) {
                cfg.alternate = io::response_from_json(io::read_json(alternate_path));
            }
            if (!truth_counts_path.empty()) {
                cfg.truth = io::counts_from_json(io::read_json(truth_counts_path)).as_doubles();
            }
            cfg.unfold = sopt.config();
            cfg.threads = threads;
            const auto table = uncertainty_scan(calib, r, m, cfg);
            io::write_text(out_path, io::scan_csv(table));
            if (!report_path.empty()) {
                json doc;
                doc["schema"] = io::kSchema;
                doc["recommended_iterations"] = *table.recommended_iterations;
                json rows = json::array();
                for (const auto &row : table.rows) {
                    rows.push_back(io::to_json(*row.report));
                }
                doc["reports"] = std::move(rows);
                if (table.ignis) {
                    doc["ignis"] = {{"bias", table.ignis->bias}, {"mse", table.ignis->mse}};
                }
                if (table.inversion) {
                    doc["inversion"] = {{"bias", table.inversion->bias}, {"mse", table.inversion->mse}};
                }
                io::write_json(report_path, doc);
            }
            out << "recommended_iterations=" << *table.recommended_iterations << '\n';
        } else if (sub == pseudo) {
            detail::require_seed(seed, "pseudo");
            PseudoExperimentConfig cfg;
            cfg.truth.kind = parse_truth_kind(truth_kind);
            cfg.truth.n_qubits = qubits;
            cfg.truth.n_bins = bins;
            cfg.truth.sigma = sigma.value_or(cfg.truth.kind == TruthKind::BinnedGaussian ? 3.0 : 3.5);
            cfg.shots = shots;
            cfg.n_experiments = experiments;
            cfg.methods.clear();
            for (const auto &mname : methods.empty() ? std::vector<std::string>{"inversion", "ls", "ibu"} : methods) {
                cfg.methods.push_back(parse_method(mname));
            }
            cfg.unfold = popt.config();
            cfg.reference = reference == "theoretical" ? Reference::Theoretical : Reference::SampledTruth;
            cfg.seed = *seed;
            cfg.threads = threads;
            const auto r = response_path.empty()
                               ? from_noise_model(NoiseModel::uniform(qubits, pseudo_p01, pseudo_p10))
                               : io::response_from_json(io::read_json(response_path));
            const auto report = pseudo_experiments(r, cfg);

            std::string csv = "method,experiment,state,true,predicted\n";
            std::string summary = "method,n,mean,std,std_error\n";
            for (const auto &pool : report.pools) {
                const std::string mname(to_string(pool.method));
                for (std::size_t k = 0; k < pool.truth.size(); ++k) {
                    csv += mname + "," + std::to_string(k / report.n_states) + "," +
                           std::to_string(k % report.n_states) + "," + io::format_double(pool.truth[k]) + "," +
                           io::format_double(pool.predicted[k]) + "\n";
                }
                summary += mname + "," + std::to_string(pool.truth.size()) + "," + io::format_double(pool.mean()) +
                           "," + io::format_double(pool.std_dev()) + "," + io::format_double(pool.std_error()) + "\n";
            }
            io::write_text(out_path, csv);
            io::write_text(summary_path.empty() ? out_path + ".summary.csv" : summary_path, summary);
            out << summary;
        } else if (sub == ex) {
            const bool two_level = example_name == "two_level" || example_name == "eq1";
            const auto r = two_level ? two_level_example(eps) : tridiagonal_example(bins, eps);
            io::write_json(out_path, io::to_json(r));
        }
        write_manifest(*sub, out_path);
    } catch (const Error &e) {
        detail::report_error(err, std::string(to_string(e.code())), e.what());
        return is_numerical(e.code()) ? kExitNumerical : kExitInput;
    } catch (const std::exception &e) {
        detail::report_error(err, "InvalidInput", name + ": " + e.what());
        return kExitInput;
    }
    return kExitOk;
}

inline int run(const std::vector<std::string> &args, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    std::vector<const char *> argv{"qunfold"};
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace qunfold::cli
