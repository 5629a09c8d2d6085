#pragma once

// Experiment orchestration: config parsing, the end-to-end fusion pipeline,
// oracle mode, the ablation registry, grid runs, and report aggregation.

#include "hsfuse/cube.hpp"
#include "hsfuse/degrade.hpp"
#include "hsfuse/len.hpp"
#include "hsfuse/metrics.hpp"
#include "hsfuse/psf.hpp"
#include "hsfuse/unmix.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hsfuse {

struct RunSpec {
    PsfKind psf = PsfKind::Gaussian;
    int r = 4;
    int c = 4;
};

struct ExperimentConfig {
    std::string gt_path;
    std::string lr_hsi_path;   // alternative ingestion: provide observations directly
    std::string hr_msi_path;
    std::string out_dir;
    std::vector<PsfKind> psf_kinds = {PsfKind::Gaussian};
    PsfParams psf_params;
    std::vector<RunSpec> grid;           // derived from psf_kinds x rc pairs
    std::vector<std::pair<int, int>> rc_pairs = {{4, 4}};
    std::map<int, std::string> srf_paths;  // per c; missing -> Gaussian-bump SRF
    std::optional<int> K;
    std::string dataset_tag;
    int csp_s = 4;
    bool use_csp = true;                  // applies when c == 1
    bool noise = true;
    std::optional<double> hsi_snr_db;     // derived from r when unset
    double msi_snr_db = 40.0;
    bool normalize_gt = false;
    uint64_t seed = 0;
    TrainConfig train;
    NmfOptions nmf_opts;

    int resolve_k(int bands) const {
        (void)bands;
        if (K) return *K;
        return choose_k(dataset_tag);
    }
};

struct RunRecord {
    std::string label;
    std::string config_snapshot;
    uint64_t provenance = 0;
    bool has_metrics = false;
    QualityReport report;
    std::map<std::string, double> stage_seconds;
};

// -------------------------------------------------------------------------
// Config snapshot + provenance

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

inline std::string config_snapshot(const ExperimentConfig& cfg, const RunSpec& rs,
                                   const std::string& variant = "baseline") {
    std::ostringstream out;
    out.precision(17);
    out << "variant=" << variant << "\n";
    out << "gt=" << cfg.gt_path << "\n";
    out << "lr_hsi=" << cfg.lr_hsi_path << "\n";
    out << "hr_msi=" << cfg.hr_msi_path << "\n";
    out << "psf=" << psf_kind_name(rs.psf) << "\n";
    for (const auto& [k, v] : cfg.psf_params) out << "psf." << k << "=" << v << "\n";
    out << "r=" << rs.r << "\n";
    out << "c=" << rs.c << "\n";
    auto it = cfg.srf_paths.find(rs.c);
    out << "srf=" << (it == cfg.srf_paths.end() ? std::string("auto") : it->second) << "\n";
    out << "k=" << (cfg.K ? std::to_string(*cfg.K) : cfg.dataset_tag) << "\n";
    out << "csp_s=" << cfg.csp_s << "\n";
    out << "use_csp=" << (cfg.use_csp ? 1 : 0) << "\n";
    out << "noise=" << (cfg.noise ? 1 : 0) << "\n";
    out << "hsi_snr_db=";
    if (cfg.hsi_snr_db) out << *cfg.hsi_snr_db; else out << "auto";
    out << "\n";
    out << "msi_snr_db=" << cfg.msi_snr_db << "\n";
    out << "normalize=" << (cfg.normalize_gt ? 1 : 0) << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "train.epochs=" << cfg.train.epochs << "\n";
    out << "train.batch_size=" << cfg.train.batch_size << "\n";
    out << "train.lr_max=" << cfg.train.lr_max << "\n";
    out << "train.div_factor=" << cfg.train.div_factor << "\n";
    out << "train.final_div_factor=" << cfg.train.final_div_factor << "\n";
    out << "train.warmup_fraction=" << cfg.train.warmup_fraction << "\n";
    out << "train.loss=" << (cfg.train.loss == LossKind::Mae ? "mae" : "mse") << "\n";
    out << "train.hidden=" << cfg.train.hidden << "\n";
    out << "train.hidden_layers=" << cfg.train.hidden_layers << "\n";
    out << "train.activation=" << activation_name(cfg.train.hidden_activation) << "\n";
    out << "train.output_mode=" << output_mode_name(cfg.train.output_mode) << "\n";
    out << "nmf.max_iters=" << cfg.nmf_opts.max_iters << "\n";
    out << "nmf.rel_tol=" << cfg.nmf_opts.rel_tol << "\n";
    return out.str();
}

// -------------------------------------------------------------------------
// Config file parsing (UTF-8 key=value lines, '#' comments)

inline std::vector<std::pair<int, int>> parse_rc_list(const std::string& s) {
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        const size_t sep = tok.find(':');
        if (sep == std::string::npos)
            throw std::invalid_argument("rc list entry must be r:c, got " + tok);
        out.emplace_back(std::stoi(tok.substr(0, sep)), std::stoi(tok.substr(sep + 1)));
    }
    if (out.empty()) throw std::invalid_argument("empty rc list");
    return out;
}

inline const std::vector<std::pair<int, int>>& standard_rc_grid() {
    static const std::vector<std::pair<int, int>> grid = {
        {4, 4}, {8, 4}, {16, 4}, {32, 4}, {8, 1}, {8, 3}, {8, 8}, {8, 16}};
    return grid;
}

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& val) {
    if (key == "gt") cfg.gt_path = val;
    else if (key == "lr_hsi") cfg.lr_hsi_path = val;
    else if (key == "hr_msi") cfg.hr_msi_path = val;
    else if (key == "out_dir") cfg.out_dir = val;
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "k") cfg.K = std::stoi(val);
    else if (key == "dataset_tag") cfg.dataset_tag = val;
    else if (key == "csp_s") cfg.csp_s = std::stoi(val);
    else if (key == "use_csp") cfg.use_csp = std::stoi(val) != 0;
    else if (key == "noise") cfg.noise = (val == "on" || val == "1");
    else if (key == "hsi_snr_db") cfg.hsi_snr_db = std::stod(val);
    else if (key == "msi_snr_db") cfg.msi_snr_db = std::stod(val);
    else if (key == "normalize") cfg.normalize_gt = std::stoi(val) != 0;
    else if (key == "psf") {
        cfg.psf_kinds.clear();
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = detail::trim(tok);
            if (tok == "all")
                cfg.psf_kinds.assign(all_psf_kinds.begin(), all_psf_kinds.end());
            else
                cfg.psf_kinds.push_back(parse_psf_kind(tok));
        }
    } else if (key.rfind("psf.", 0) == 0) {
        cfg.psf_params[key.substr(4)] = std::stod(val);
    } else if (key == "rc") {
        cfg.rc_pairs = (val == "standard_grid") ? standard_rc_grid() : parse_rc_list(val);
    } else if (key.rfind("srf.", 0) == 0) {
        cfg.srf_paths[std::stoi(key.substr(4))] = val;
    } else if (key == "train.epochs") cfg.train.epochs = std::stoi(val);
    else if (key == "train.batch_size") cfg.train.batch_size = std::stoi(val);
    else if (key == "train.lr_max") cfg.train.lr_max = std::stod(val);
    else if (key == "train.div_factor") cfg.train.div_factor = std::stod(val);
    else if (key == "train.final_div_factor") cfg.train.final_div_factor = std::stod(val);
    else if (key == "train.warmup_fraction") cfg.train.warmup_fraction = std::stod(val);
    else if (key == "train.loss") cfg.train.loss = (val == "mse" ? LossKind::Mse : LossKind::Mae);
    else if (key == "train.hidden") cfg.train.hidden = std::stoi(val);
    else if (key == "train.hidden_layers") cfg.train.hidden_layers = std::stoi(val);
    else if (key == "train.activation") cfg.train.hidden_activation = parse_activation(val);
    else if (key == "train.output_mode") cfg.train.output_mode = parse_output_mode(val);
    else if (key == "nmf.max_iters") cfg.nmf_opts.max_iters = std::stoi(val);
    else if (key == "nmf.rel_tol") cfg.nmf_opts.rel_tol = std::stod(val);
    else throw std::invalid_argument("unknown config key: " + key);
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    ExperimentConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#' || line[0] == '[') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("malformed config line: " + line);
        apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                           detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

// -------------------------------------------------------------------------
// Pipeline stages

namespace detail {

class StageTimer {
  public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
    template <typename F>
    auto time(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            sink_[name] = seconds_since(t0);
        } else {
            auto result = f();
            sink_[name] = seconds_since(t0);
            return result;
        }
    }

  private:
    static double seconds_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    std::map<std::string, double>& sink_;
};

inline SrfMatrix resolve_srf(const ExperimentConfig& cfg, int hsi_bands, int c) {
    auto it = cfg.srf_paths.find(c);
    if (it != cfg.srf_paths.end()) {
        SrfMatrix srf = load_srf_csv(it->second);
        if (srf.input_bands() != hsi_bands || srf.output_bands() != c)
            throw std::runtime_error("srf file shape does not match configuration");
        return srf;
    }
    return make_gaussian_srf(hsi_bands, c);
}

inline void write_run_outputs(const std::string& dir, const RunRecord& rec,
                              const DataCube* lr_hsi, const DataCube* hr_msi,
                              const DataCube* hr_est, const DataCube* alle,
                              const EndmemberDictionary* dict) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::map<std::string, std::string> prov = {{"provenance", hex64(rec.provenance)}};
    {
        std::ofstream snap(dir + "/config.snapshot");
        snap << rec.config_snapshot;
    }
    if (lr_hsi) save_cube(*lr_hsi, dir + "/lr_hsi", prov);
    if (hr_msi) save_cube(*hr_msi, dir + "/hr_msi", prov);
    if (hr_est) save_cube(*hr_est, dir + "/hr_hsi_est", prov);
    if (alle) save_cube(*alle, dir + "/alle", prov);
    if (dict) save_endmembers_csv(*dict, dir + "/endmembers.csv");
    if (rec.has_metrics) {
        std::ofstream rep(dir + "/report.csv");
        rep << "label," << report_csv_header() << "\n";
        rep << rec.label << "," << report_csv_row(rec.report) << "\n";
    }
    // wall-clock timings are environment-dependent and live outside the
    // deterministic outputs
    std::ofstream tim(dir + "/timings.txt");
    for (const auto& [k, v] : rec.stage_seconds) tim << k << " " << v << "\n";
    tim << "total " << rec.report.wall_time_s << "\n";
}

}  // namespace detail

inline std::string run_label(const RunSpec& rs, const std::string& variant = "baseline") {
    std::string l = std::string(psf_kind_name(rs.psf)) + "_r" + std::to_string(rs.r) +
                    "_c" + std::to_string(rs.c);
    if (variant != "baseline") l += "_" + variant;
    return l;
}

// End-to-end deployable pipeline for one (psf, r, c) cell: degrade (or
// ingest), synthesize the LR-MSI, unmix, train, infer, evaluate on the 25%
// test crop, and write the run directory.
inline RunRecord run_fusion(const ExperimentConfig& cfg, const RunSpec& rs,
                            const std::string& variant = "baseline") {
    RunRecord rec;
    rec.label = run_label(rs, variant);
    rec.config_snapshot = config_snapshot(cfg, rs, variant);
    rec.provenance = fnv1a64(rec.config_snapshot);
    detail::StageTimer timer(rec.stage_seconds);
    const auto t_start = std::chrono::steady_clock::now();

    std::optional<DataCube> gt;
    DataCube lr_hsi, hr_msi;
    SrfMatrix srf;

    if (!cfg.lr_hsi_path.empty()) {
        lr_hsi = load_cube(cfg.lr_hsi_path);
        hr_msi = load_cube(cfg.hr_msi_path);
        srf = detail::resolve_srf(cfg, lr_hsi.bands, hr_msi.bands);
        if (!cfg.gt_path.empty()) {
            gt = load_cube(cfg.gt_path);
            if (cfg.normalize_gt) gt = normalize_unit(*gt);
        }
    } else {
        gt = load_cube(cfg.gt_path);
        if (cfg.normalize_gt) gt = normalize_unit(*gt);
        srf = detail::resolve_srf(cfg, gt->bands, rs.c);
        DegradeConfig dc;
        dc.r = rs.r;
        dc.psf = make_kernel(rs.psf, cfg.psf_params);
        dc.srf = srf;
        dc.seed = cfg.seed;
        dc.hsi_snr_db = cfg.noise ? cfg.hsi_snr_db : std::optional<double>(noise_disabled);
        dc.msi_snr_db = cfg.noise ? cfg.msi_snr_db : noise_disabled;
        timer.time("degrade", [&] {
            auto [y, m] = wald_generate(*gt, dc);
            lr_hsi = std::move(y);
            hr_msi = std::move(m);
        });
    }

    const int K = cfg.resolve_k(lr_hsi.bands);
    NmfResult nmf_result = timer.time("unmix", [&] {
        return nmf(flatten(lr_hsi), K, cfg.nmf_opts);
    });

    DataCube lr_msi = apply_srf(lr_hsi, srf);

    const bool with_csp = cfg.use_csp && rs.c == 1;
    std::optional<DataCube> csp_train, csp_infer;
    DataCube train_msi = lr_msi, train_hsi = lr_hsi;
    if (with_csp) {
        bool truncated = false;
        csp_train = build_csp(lr_hsi, cfg.csp_s, &truncated);
        if (truncated) {
            const CropSpec fit{0, 0, csp_train->height, csp_train->width};
            train_msi = crop(lr_msi, fit);
            train_hsi = crop(lr_hsi, fit);
        }
        csp_infer = build_inference_csp(lr_hsi, rs.r);
        if (csp_infer->height != hr_msi.height || csp_infer->width != hr_msi.width) {
            // HR extent not an exact multiple of r: restrict to the covered part
            const CropSpec fit{0, 0, std::min(csp_infer->height, hr_msi.height),
                               std::min(csp_infer->width, hr_msi.width)};
            csp_infer = crop(*csp_infer, fit);
            hr_msi = crop(hr_msi, fit);
            if (gt) gt = crop(*gt, fit);
        }
    }

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    TrainResult trained = timer.time("train", [&] {
        return train(train_msi, train_hsi, nmf_result.dictionary, tc,
                     csp_train ? &*csp_train : nullptr);
    });

    InferResult inferred = timer.time("infer", [&] {
        return infer(trained.model, hr_msi, nmf_result.dictionary,
                     csp_infer ? &*csp_infer : nullptr);
    });

    if (gt) {
        timer.time("metrics", [&] {
            const auto [train_crop, test_crop] = split_train_test(*gt);
            MetricOptions mo;
            mo.ergas_ratio = 1.0 / rs.r;
            rec.report = evaluate(crop(*gt, test_crop), crop(inferred.hr_hsi, test_crop), mo);
        });
        rec.has_metrics = true;
    }
    rec.report.params = count_params(trained.model);
    rec.report.flops = estimate_flops(trained.model, inferred.hr_hsi.pixel_count(),
                                      inferred.hr_hsi.bands);
    rec.report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!cfg.out_dir.empty())
        detail::write_run_outputs(cfg.out_dir + "/" + rec.label, rec, &lr_hsi, &hr_msi,
                                  &inferred.hr_hsi, &inferred.alle, &nmf_result.dictionary);
    return rec;
}

inline RunRecord run_fusion(const ExperimentConfig& cfg) {
    RunSpec rs{cfg.psf_kinds.front(), cfg.rc_pairs.front().first, cfg.rc_pairs.front().second};
    return run_fusion(cfg, rs);
}

// Diagnostic upper bound: endmembers from the full ground truth, supervised
// training on the 75% crop against GT spectra, evaluation on the disjoint
// 25% crop.
inline RunRecord run_oracle(const ExperimentConfig& cfg, const RunSpec& rs) {
    RunRecord rec;
    rec.label = run_label(rs, "oracle");
    rec.config_snapshot = config_snapshot(cfg, rs, "oracle");
    rec.provenance = fnv1a64(rec.config_snapshot);
    detail::StageTimer timer(rec.stage_seconds);
    const auto t_start = std::chrono::steady_clock::now();

    if (cfg.gt_path.empty())
        throw std::invalid_argument("run_oracle: ground truth required");
    DataCube gt = load_cube(cfg.gt_path);
    if (cfg.normalize_gt) gt = normalize_unit(gt);
    const SrfMatrix srf = detail::resolve_srf(cfg, gt.bands, rs.c);

    DegradeConfig dc;
    dc.r = rs.r;
    dc.psf = make_kernel(rs.psf, cfg.psf_params);
    dc.srf = srf;
    dc.seed = cfg.seed;
    dc.hsi_snr_db = cfg.noise ? cfg.hsi_snr_db : std::optional<double>(noise_disabled);
    dc.msi_snr_db = cfg.noise ? cfg.msi_snr_db : noise_disabled;
    DataCube lr_hsi, hr_msi;
    timer.time("degrade", [&] {
        auto [y, m] = wald_generate(gt, dc);
        lr_hsi = std::move(y);
        hr_msi = std::move(m);
    });

    const int K = cfg.resolve_k(gt.bands);
    NmfResult nmf_result = timer.time("unmix", [&] {
        return nmf(flatten(gt), K, cfg.nmf_opts);
    });

    const bool with_csp = cfg.use_csp && rs.c == 1;
    std::optional<DataCube> csp_hr;
    if (with_csp) {
        csp_hr = build_inference_csp(lr_hsi, rs.r);
        const CropSpec fit{0, 0, std::min(csp_hr->height, hr_msi.height),
                           std::min(csp_hr->width, hr_msi.width)};
        csp_hr = crop(*csp_hr, fit);
        hr_msi = crop(hr_msi, fit);
        gt = crop(gt, fit);
    }

    const auto [train_crop, test_crop] = split_train_test(gt);
    const DataCube gt_train = crop(gt, train_crop);
    const DataCube gt_test = crop(gt, test_crop);
    const DataCube msi_train = crop(hr_msi, train_crop);
    const DataCube msi_test = crop(hr_msi, test_crop);
    std::optional<DataCube> csp_train, csp_test;
    if (csp_hr) {
        csp_train = crop(*csp_hr, train_crop);
        csp_test = crop(*csp_hr, test_crop);
    }

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    TrainResult trained = timer.time("train", [&] {
        return train(msi_train, gt_train, nmf_result.dictionary, tc,
                     csp_train ? &*csp_train : nullptr);
    });

    InferResult inferred = timer.time("infer", [&] {
        return infer(trained.model, msi_test, nmf_result.dictionary,
                     csp_test ? &*csp_test : nullptr);
    });

    timer.time("metrics", [&] {
        MetricOptions mo;
        mo.ergas_ratio = 1.0 / rs.r;
        rec.report = evaluate(gt_test, inferred.hr_hsi, mo);
    });
    rec.has_metrics = true;
    rec.report.params = count_params(trained.model);
    rec.report.flops = estimate_flops(trained.model, inferred.hr_hsi.pixel_count(),
                                      inferred.hr_hsi.bands);
    rec.report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!cfg.out_dir.empty())
        detail::write_run_outputs(cfg.out_dir + "/" + rec.label, rec, &lr_hsi, &hr_msi,
                                  &inferred.hr_hsi, &inferred.alle, &nmf_result.dictionary);
    return rec;
}

inline RunRecord run_oracle(const ExperimentConfig& cfg) {
    RunSpec rs{cfg.psf_kinds.front(), cfg.rc_pairs.front().first, cfg.rc_pairs.front().second};
    return run_oracle(cfg, rs);
}

// -------------------------------------------------------------------------
// Ablation registry: each variant deviates from the baseline in exactly one
// registered field.

inline const std::vector<std::string>& ablation_variants() {
    static const std::vector<std::string> v = {
        "baseline",     "nn",          "nn_sum1",     "no_hidden",   "neurons_64",
        "neurons_128",  "neurons_256", "neurons_512", "neurons_2048", "two_hidden",
        "mse_loss",     "leaky_relu",  "gelu",        "tanh",        "k_plus_4",
        "k_minus_4",    "csp_off",     "csp_s2",      "csp_s4",      "csp_s8",
        "csp_s16"};
    return v;
}

inline ExperimentConfig apply_ablation(const ExperimentConfig& base, const std::string& v,
                                       int base_k) {
    ExperimentConfig cfg = base;
    if (v == "baseline") return cfg;
    if (v == "nn") cfg.train.output_mode = OutputMode::Relu;
    else if (v == "nn_sum1") cfg.train.output_mode = OutputMode::Softmax;
    else if (v == "no_hidden") cfg.train.hidden_layers = 0;
    else if (v == "neurons_64") cfg.train.hidden = 64;
    else if (v == "neurons_128") cfg.train.hidden = 128;
    else if (v == "neurons_256") cfg.train.hidden = 256;
    else if (v == "neurons_512") cfg.train.hidden = 512;
    else if (v == "neurons_2048") cfg.train.hidden = 2048;
    else if (v == "two_hidden") cfg.train.hidden_layers = 2;
    else if (v == "mse_loss") cfg.train.loss = LossKind::Mse;
    else if (v == "leaky_relu") cfg.train.hidden_activation = Activation::LeakyRelu;
    else if (v == "gelu") cfg.train.hidden_activation = Activation::Gelu;
    else if (v == "tanh") cfg.train.hidden_activation = Activation::Tanh;
    else if (v == "k_plus_4") cfg.K = base_k + 4;
    else if (v == "k_minus_4") cfg.K = base_k - 4;
    else if (v == "csp_off") cfg.use_csp = false;
    else if (v == "csp_s2") cfg.csp_s = 2;
    else if (v == "csp_s4") cfg.csp_s = 4;
    else if (v == "csp_s8") cfg.csp_s = 8;
    else if (v == "csp_s16") cfg.csp_s = 16;
    else throw std::invalid_argument("unknown ablation variant: " + v);
    return cfg;
}

// Number of snapshot lines changed by a variant relative to baseline.
inline int snapshot_diff_count(const ExperimentConfig& base, const ExperimentConfig& variant,
                               const RunSpec& rs) {
    std::istringstream a(config_snapshot(base, rs));
    std::istringstream b(config_snapshot(variant, rs));
    std::string la, lb;
    int diff = 0;
    while (std::getline(a, la) && std::getline(b, lb))
        if (la != lb) ++diff;
    return diff;
}

inline RunRecord run_ablation(const ExperimentConfig& cfg, const RunSpec& rs,
                              const std::string& variant) {
    const int base_k = cfg.resolve_k(0);
    const ExperimentConfig patched = apply_ablation(cfg, variant, base_k);
    // at most one: a registry sweep value can coincide with the baseline
    // setting (e.g. the default prior block size), which yields zero diffs
    if (snapshot_diff_count(cfg, patched, rs) > 1)
        throw std::logic_error("ablation variant '" + variant +
                               "' differs from baseline in more than one field");
    return run_fusion(patched, rs, variant);
}

// -------------------------------------------------------------------------
// Aggregation

struct SummaryTable {
    size_t count = 0;
    int infinite_psnr_count = 0;
    QualityReport means;
};

inline SummaryTable aggregate_reports(const std::vector<RunRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("aggregate_reports: no records");
    SummaryTable s;
    double psnr_sum = 0.0;
    size_t psnr_n = 0;
    for (const RunRecord& r : records) {
        if (!r.has_metrics)
            throw std::invalid_argument("aggregate_reports: record without metrics");
        ++s.count;
        s.means.rmse += r.report.rmse;
        s.means.ssim += r.report.ssim;
        s.means.uiqi += r.report.uiqi;
        s.means.ergas += r.report.ergas;
        s.means.sam_deg += r.report.sam_deg;
        s.means.wall_time_s += r.report.wall_time_s;
        if (std::isinf(r.report.psnr_db)) {
            ++s.infinite_psnr_count;
        } else {
            psnr_sum += r.report.psnr_db;
            ++psnr_n;
        }
    }
    s.means.rmse /= s.count;
    s.means.ssim /= s.count;
    s.means.uiqi /= s.count;
    s.means.ergas /= s.count;
    s.means.sam_deg /= s.count;
    s.means.wall_time_s /= s.count;
    s.means.psnr_db = psnr_n ? psnr_sum / psnr_n : psnr_infinite;
    return s;
}

inline std::string summary_csv(const SummaryTable& s) {
    std::ostringstream out;
    out.precision(10);
    out << "count,rmse,psnr_db,ssim,uiqi,ergas,sam_deg,infinite_psnr_excluded\n";
    out << s.count << "," << s.means.rmse << ",";
    if (std::isinf(s.means.psnr_db)) out << "inf";
    else out << s.means.psnr_db;
    out << "," << s.means.ssim << "," << s.means.uiqi << "," << s.means.ergas << ","
        << s.means.sam_deg << "," << s.infinite_psnr_count << "\n";
    return out.str();
}

inline std::string summary_text(const SummaryTable& s) {
    std::ostringstream out;
    out.precision(6);
    out << "runs        " << s.count << "\n";
    out << "mean rmse   " << s.means.rmse << "\n";
    out << "mean psnr   ";
    if (std::isinf(s.means.psnr_db)) out << "inf";
    else out << s.means.psnr_db;
    out << (s.infinite_psnr_count
                ? "  (" + std::to_string(s.infinite_psnr_count) + " infinite excluded)"
                : "")
        << "\n";
    out << "mean ssim   " << s.means.ssim << "\n";
    out << "mean uiqi   " << s.means.uiqi << "\n";
    out << "mean ergas  " << s.means.ergas << "\n";
    out << "mean sam    " << s.means.sam_deg << "\n";
    return out.str();
}

// Full grid: every configured PSF x (r,c) cell.
inline std::vector<RunRecord> run_grid(const ExperimentConfig& cfg) {
    std::vector<RunRecord> records;
    for (PsfKind psf : cfg.psf_kinds)
        for (const auto& [r, c] : cfg.rc_pairs)
            records.push_back(run_fusion(cfg, RunSpec{psf, r, c}));
    return records;
}

}  // namespace hsfuse
