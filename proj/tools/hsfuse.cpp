// Command-line front end for the fusion pipeline.
//
// Verbs: degrade, unmix, fuse, metrics, grid, oracle, ablate, report.
// HSFUSE_OUT_ROOT, when set, prefixes relative output directories.

#include "hsfuse/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

using namespace hsfuse;

std::string resolve_out(const std::string& dir) {
    const char* root = std::getenv("HSFUSE_OUT_ROOT");
    if (!root || dir.empty() || std::filesystem::path(dir).is_absolute()) return dir;
    return (std::filesystem::path(root) / dir).string();
}

PsfParams parse_psf_params(const std::vector<std::string>& kvs) {
    PsfParams params;
    for (const std::string& kv : kvs) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--psf-param", "expected name=value, got " + kv);
        params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return params;
}

int cmd_degrade(const std::string& gt_path, const std::string& psf_name,
                const std::vector<std::string>& psf_param_kvs, int r, int c,
                const std::string& srf_path, uint64_t seed, double hsi_snr,
                double msi_snr, bool no_noise, bool normalize,
                const std::string& out_dir_arg) {
    const std::string out_dir = resolve_out(out_dir_arg);
    DataCube gt = load_cube(gt_path);
    if (normalize) gt = normalize_unit(gt);

    DegradeConfig cfg;
    cfg.r = r;
    cfg.seed = seed;
    cfg.psf = make_kernel(parse_psf_kind(psf_name), parse_psf_params(psf_param_kvs));
    cfg.srf = srf_path.empty() ? make_gaussian_srf(gt.bands, c) : load_srf_csv(srf_path);
    if (cfg.srf.output_bands() != c)
        throw std::runtime_error("srf column count does not match --c");
    if (no_noise) {
        cfg.hsi_snr_db = noise_disabled;
        cfg.msi_snr_db = noise_disabled;
    } else if (hsi_snr > 0) {
        cfg.hsi_snr_db = hsi_snr;
        cfg.msi_snr_db = msi_snr;
    } else {
        cfg.msi_snr_db = msi_snr;
    }

    auto [lr_hsi, hr_msi] = wald_generate(gt, cfg);
    std::filesystem::create_directories(out_dir);
    save_cube(lr_hsi, out_dir + "/lr_hsi");
    save_cube(hr_msi, out_dir + "/hr_msi");
    save_srf_csv(cfg.srf, out_dir + "/srf.csv");
    std::ofstream prov(out_dir + "/provenance.txt");
    prov << "gt=" << gt_path << "\n"
         << "psf=" << psf_name << "\n"
         << "r=" << r << "\n"
         << "c=" << c << "\n"
         << "hsi_snr_db=" << cfg.effective_hsi_snr() << "\n"
         << "msi_snr_db=" << cfg.msi_snr_db << "\n"
         << "seed=" << seed << "\n";
    std::cout << "wrote " << out_dir << "/lr_hsi (" << lr_hsi.height << "x" << lr_hsi.width
              << "x" << lr_hsi.bands << ") and hr_msi (" << hr_msi.height << "x"
              << hr_msi.width << "x" << hr_msi.bands << ")\n";
    return 0;
}

int cmd_unmix(const std::string& lr_hsi_path, int k, const std::string& out_csv,
              const std::string& abundance_out, int max_iters) {
    DataCube lr_hsi = load_cube(lr_hsi_path);
    NmfOptions opts;
    opts.max_iters = max_iters;
    NmfResult result = nmf(flatten(lr_hsi), k, opts);
    save_endmembers_csv(result.dictionary, out_csv);
    if (!abundance_out.empty())
        save_cube(abundance_cube(result, lr_hsi.height, lr_hsi.width), abundance_out);
    std::cout << "k=" << k << " iterations=" << result.iterations
              << " relative_residual=" << result.residual << "\n";
    return 0;
}

int cmd_metrics(const std::string& gt_path, const std::string& est_path,
                const std::vector<int>& crop_box, double ergas_ratio,
                const std::string& csv_out) {
    DataCube gt = load_cube(gt_path);
    DataCube est = load_cube(est_path);
    if (!crop_box.empty()) {
        if (crop_box.size() != 4)
            throw CLI::ValidationError("--crop", "expected row0 col0 rows cols");
        const CropSpec spec{crop_box[0], crop_box[1], crop_box[2], crop_box[3]};
        gt = crop(gt, spec);
        est = crop(est, spec);
    }
    MetricOptions opts;
    opts.ergas_ratio = ergas_ratio;
    const QualityReport report = evaluate(gt, est, opts);
    std::cout << report_text(report);
    if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        out << report_csv_header() << "\n" << report_csv_row(report) << "\n";
    }
    return 0;
}

void print_record(const RunRecord& rec) {
    std::cout << "[" << rec.label << "] provenance=" << hex64(rec.provenance) << "\n";
    if (rec.has_metrics)
        std::cout << report_text(rec.report);  // includes params/flops when set
    else
        std::cout << "params   " << rec.report.params << "\n"
                  << "flops    " << rec.report.flops << "\n";
    std::cout << "time_s   " << rec.report.wall_time_s << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-supervised hyperspectral/multispectral fusion pipeline"};
    app.require_subcommand(1);

    // shared option storage
    std::string gt_path, lr_hsi_path, hr_msi_path, srf_path, out_dir, out_csv, config_path;
    std::string psf_name = "gaussian", abundance_out, variant, est_path;
    std::vector<std::string> psf_param_kvs, report_inputs;
    std::vector<int> crop_box;
    uint64_t seed = 0;
    int r = 4, c = 4, k = 0, csp_s = 0, max_iters = 500;
    double hsi_snr = 0.0, msi_snr = 40.0, ergas_ratio = 1.0;
    bool no_noise = false, normalize = false;

    auto* degrade_cmd = app.add_subcommand("degrade", "synthesize LR-HSI/HR-MSI from a ground-truth cube");
    degrade_cmd->add_option("--gt", gt_path, "ground-truth cube (base path)")->required();
    degrade_cmd->add_option("--psf", psf_name, "kernel family");
    degrade_cmd->add_option("--psf-param", psf_param_kvs, "kernel parameter name=value");
    degrade_cmd->add_option("--r", r, "spatial downsampling factor")->required();
    degrade_cmd->add_option("--c", c, "MSI band count")->required();
    degrade_cmd->add_option("--srf", srf_path, "SRF CSV (default: Gaussian-bump SRF)");
    degrade_cmd->add_option("--seed", seed, "RNG seed")->required();
    degrade_cmd->add_option("--hsi-snr", hsi_snr, "HSI noise SNR in dB (default: paired to r)");
    degrade_cmd->add_option("--msi-snr", msi_snr, "MSI noise SNR in dB");
    degrade_cmd->add_flag("--no-noise", no_noise, "disable noise injection");
    degrade_cmd->add_flag("--normalize", normalize, "globally rescale GT to [0,1] first");
    degrade_cmd->add_option("--out-dir", out_dir, "output directory")->required();

    auto* unmix_cmd = app.add_subcommand("unmix", "extract an endmember dictionary via NMF");
    unmix_cmd->add_option("--lr-hsi", lr_hsi_path, "LR-HSI cube")->required();
    unmix_cmd->add_option("--k", k, "endmember count")->required();
    unmix_cmd->add_option("--out", out_csv, "endmember CSV output")->required();
    unmix_cmd->add_option("--abundance-out", abundance_out, "optional abundance cube output");
    unmix_cmd->add_option("--max-iters", max_iters, "NMF iteration cap");

    auto* fuse_cmd = app.add_subcommand("fuse", "run unmix + train + infer on an observation pair");
    fuse_cmd->add_option("--lr-hsi", lr_hsi_path, "LR-HSI cube")->required();
    fuse_cmd->add_option("--hr-msi", hr_msi_path, "HR-MSI cube")->required();
    fuse_cmd->add_option("--srf", srf_path, "SRF CSV (default: Gaussian-bump SRF)");
    fuse_cmd->add_option("--gt", gt_path, "optional GT cube for test-crop metrics");
    fuse_cmd->add_option("--k", k, "endmember count")->required();
    fuse_cmd->add_option("--csp-s", csp_s, "coarse-prior factor for c=1 (default 4)");
    fuse_cmd->add_option("--seed", seed, "RNG seed")->required();
    fuse_cmd->add_option("--out-dir", out_dir, "run output directory")->required();

    auto* metrics_cmd = app.add_subcommand("metrics", "score a reconstruction against ground truth");
    metrics_cmd->add_option("--gt", gt_path, "ground-truth cube")->required();
    metrics_cmd->add_option("--est", est_path, "estimate cube")->required();
    metrics_cmd->add_option("--crop", crop_box, "row0 col0 rows cols")->expected(4);
    metrics_cmd->add_option("--ergas-ratio", ergas_ratio, "spatial resolution ratio (1/r)");
    metrics_cmd->add_option("--csv", out_csv, "also write a CSV row");

    auto* grid_cmd = app.add_subcommand("grid", "run every PSF x (r,c) cell of a config");
    grid_cmd->add_option("--config", config_path, "experiment config file")->required();
    grid_cmd->add_option("--seed", seed, "RNG seed (overrides config)")->required();
    grid_cmd->add_option("--out-dir", out_dir, "output root (overrides config)");

    auto* oracle_cmd = app.add_subcommand("oracle", "diagnostic upper-bound run with GT-derived endmembers");
    oracle_cmd->add_option("--config", config_path, "experiment config file")->required();
    oracle_cmd->add_option("--seed", seed, "RNG seed (overrides config)")->required();
    oracle_cmd->add_option("--out-dir", out_dir, "output root (overrides config)");

    auto* ablate_cmd = app.add_subcommand("ablate", "run one registered single-field deviation");
    ablate_cmd->add_option("--config", config_path, "experiment config file")->required();
    ablate_cmd->add_option("--variant", variant, "variant label (or 'list')")->required();
    auto* ablate_seed = ablate_cmd->add_option("--seed", seed, "RNG seed (overrides config)");
    ablate_cmd->add_option("--out-dir", out_dir, "output root (overrides config)");

    auto* report_cmd = app.add_subcommand("report", "aggregate per-run report.csv files");
    report_cmd->add_option("inputs", report_inputs, "report.csv files")->required();
    report_cmd->add_option("--out", out_csv, "summary CSV output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (degrade_cmd->parsed())
            return cmd_degrade(gt_path, psf_name, psf_param_kvs, r, c, srf_path, seed,
                               hsi_snr, msi_snr, no_noise, normalize, out_dir);

        if (unmix_cmd->parsed())
            return cmd_unmix(lr_hsi_path, k, out_csv, abundance_out, max_iters);

        if (metrics_cmd->parsed())
            return cmd_metrics(gt_path, est_path, crop_box, ergas_ratio, out_csv);

        if (fuse_cmd->parsed()) {
            hsfuse::ExperimentConfig cfg;
            cfg.lr_hsi_path = lr_hsi_path;
            cfg.hr_msi_path = hr_msi_path;
            cfg.gt_path = gt_path;
            cfg.K = k;
            if (csp_s > 0) cfg.csp_s = csp_s;
            cfg.seed = seed;
            cfg.out_dir = resolve_out(out_dir);
            if (!srf_path.empty()) {
                hsfuse::DataCube msi = hsfuse::load_cube(hr_msi_path);
                cfg.srf_paths[msi.bands] = srf_path;
            }
            hsfuse::DataCube msi = hsfuse::load_cube(hr_msi_path);
            hsfuse::DataCube hsi = hsfuse::load_cube(lr_hsi_path);
            const int rr = msi.height / hsi.height;
            hsfuse::RunSpec rs{hsfuse::PsfKind::Delta, std::max(1, rr), msi.bands};
            print_record(hsfuse::run_fusion(cfg, rs));
            return 0;
        }

        if (grid_cmd->parsed() || oracle_cmd->parsed() || ablate_cmd->parsed()) {
            hsfuse::ExperimentConfig cfg = hsfuse::load_experiment_config(config_path);
            cfg.seed = seed;
            if (!out_dir.empty()) cfg.out_dir = resolve_out(out_dir);
            else cfg.out_dir = resolve_out(cfg.out_dir);

            if (grid_cmd->parsed()) {
                const auto records = hsfuse::run_grid(cfg);
                for (const auto& rec : records) print_record(rec);
                const auto summary = hsfuse::aggregate_reports(records);
                std::cout << hsfuse::summary_text(summary);
                if (!cfg.out_dir.empty()) {
                    std::ofstream out(cfg.out_dir + "/summary.csv");
                    out << hsfuse::summary_csv(summary);
                }
                return 0;
            }
            if (oracle_cmd->parsed()) {
                print_record(hsfuse::run_oracle(cfg));
                return 0;
            }
            if (variant == "list") {
                for (const auto& v : hsfuse::ablation_variants()) std::cout << v << "\n";
                return 0;
            }
            if (ablate_seed->count() == 0)
                throw std::runtime_error("ablate: --seed is required to run a variant");
            hsfuse::RunSpec rs{cfg.psf_kinds.front(), cfg.rc_pairs.front().first,
                               cfg.rc_pairs.front().second};
            print_record(hsfuse::run_ablation(cfg, rs, variant));
            return 0;
        }

        if (report_cmd->parsed()) {
            std::vector<hsfuse::RunRecord> records;
            for (const std::string& path : report_inputs) {
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot open " + path);
                std::string header, line;
                std::getline(in, header);
                while (std::getline(in, line)) {
                    line = hsfuse::detail::trim(line);
                    if (line.empty()) continue;
                    std::stringstream ss(line);
                    std::string tok;
                    std::vector<std::string> cells;
                    while (std::getline(ss, tok, ',')) cells.push_back(tok);
                    if (cells.size() < 7)
                        throw std::runtime_error("malformed report row in " + path);
                    hsfuse::RunRecord rec;
                    rec.label = cells[0];
                    rec.has_metrics = true;
                    rec.report.rmse = std::stod(cells[1]);
                    rec.report.psnr_db = cells[2] == "inf" ? hsfuse::psnr_infinite
                                                           : std::stod(cells[2]);
                    rec.report.ssim = std::stod(cells[3]);
                    rec.report.uiqi = std::stod(cells[4]);
                    rec.report.ergas = std::stod(cells[5]);
                    rec.report.sam_deg = std::stod(cells[6]);
                    records.push_back(std::move(rec));
                }
            }
            const auto summary = hsfuse::aggregate_reports(records);
            std::cout << hsfuse::summary_text(summary);
            if (!out_csv.empty()) {
                std::ofstream out(out_csv);
                out << hsfuse::summary_csv(summary);
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
