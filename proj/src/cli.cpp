#include "bandsim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bandsim/metrics.hpp"
#include "bandsim/rng.hpp"

namespace bandsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSpecDrawStream = 0xb5u;
constexpr std::uint64_t kIspDrawStream = 0x15bu;

json isp_to_json(const IspParams& p) {
    return json{{"wb_gains", p.wb_gains},
                {"ccm", p.ccm},
                {"gamma_mode", p.gamma_mode == GammaMode::SrgbStandard ? "srgb_standard" : "pure_power"},
                {"gamma_exponent", p.gamma_exponent}};
}

IspParams isp_from_json(const json& j) {
    IspParams p;
    if (j.contains("wb_gains")) p.wb_gains = j.at("wb_gains").get<std::array<double, 3>>();
    if (j.contains("ccm")) p.ccm = j.at("ccm").get<std::array<std::array<double, 3>, 3>>();
    if (j.contains("gamma_mode")) {
        const std::string mode = j.at("gamma_mode").get<std::string>();
        if (mode == "srgb_standard") p.gamma_mode = GammaMode::SrgbStandard;
        else if (mode == "pure_power") p.gamma_mode = GammaMode::PurePower;
        else throw std::invalid_argument("unknown gamma_mode: " + mode);
    }
    if (j.contains("gamma_exponent")) p.gamma_exponent = j.at("gamma_exponent").get<double>();
    return p;
}

std::vector<std::string> list_files(const std::string& dir, const std::string& extension) {
    if (!fs::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (ext == extension) names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

int effective_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Fan a job list over a fixed-size pool. Results land in per-index slots, so
// output order never depends on scheduling.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
    if (count == 0) return;
    workers = std::min<std::size_t>(std::max(workers, 1), count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        });
    for (auto& th : pool) th.join();
}

ImagePlanes center_crop(const ImagePlanes& img, int size) {
    if (img.height() < size || img.width() < size)
        throw std::runtime_error("image smaller than requested " + std::to_string(size) + " crop");
    const int y0 = (img.height() - size) / 2;
    const int x0 = (img.width() - size) / 2;
    ImagePlanes out(size, size, img.domain());
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
    return out;
}

PngBitDepth bit_depth_from_int(int bits) {
    if (bits == 8) return PngBitDepth::Eight;
    if (bits == 16) return PngBitDepth::Sixteen;
    throw std::invalid_argument("png bit depth must be 8 or 16");
}

struct FailureLog {
    std::mutex mutex;
    std::vector<std::string> entries;
    void add(const std::string& file, const std::string& what) {
        std::lock_guard<std::mutex> lock(mutex);
        entries.push_back(file + ": " + what);
    }
};

int finish(const FailureLog& failures) {
    for (const std::string& entry : failures.entries)
        std::cerr << "[bandsim] FAILED " << entry << "\n";
    return failures.entries.empty() ? 0 : 1;
}

} // namespace

std::string config_to_json(const RunConfig& cfg, bool include_workers) {
    json ranges{{"period_px", {cfg.ranges.period_min_px, cfg.ranges.period_max_px}},
                {"duty", {cfg.ranges.duty_min, cfg.ranges.duty_max}},
                {"darkness", {cfg.ranges.darkness_min, cfg.ranges.darkness_max}},
                {"jitter_amp", {cfg.ranges.jitter_min, cfg.ranges.jitter_max}},
                {"feather_min_px", cfg.ranges.feather_min_px},
                {"feather_max_frac", cfg.ranges.feather_max_frac},
                {"orientation_deg", {cfg.ranges.orientation_min_deg, cfg.ranges.orientation_max_deg}},
                {"curve_amp_px", {cfg.ranges.curve_amp_min_px, cfg.ranges.curve_amp_max_px}},
                {"curve_wavelength_px", {cfg.ranges.curve_wavelength_min_px, cfg.ranges.curve_wavelength_max_px}},
                {"crack_density", {cfg.ranges.crack_density_min, cfg.ranges.crack_density_max}},
                {"gain_floor", cfg.ranges.gain_floor}};
    json patterns = json::array();
    for (BandPattern p : cfg.ranges.patterns) patterns.push_back(to_string(p));
    ranges["patterns"] = patterns;

    json j{{"master_seed", cfg.master_seed},
           {"crop512", cfg.crop512},
           {"png_bit_depth", cfg.png_bit_depth},
           {"isp", isp_to_json(cfg.isp)},
           {"randomize_isp", cfg.randomize_isp},
           {"synth", ranges},
           {"specband",
            {{"rho1", cfg.specband.rho1},
             {"rho2", cfg.specband.rho2},
             {"order_n", cfg.specband.order_n},
             {"eps", cfg.specband.eps},
             {"ref_size_m0", cfg.specband.ref_size_m0},
             {"weights", {cfg.specband.weights.low, cfg.specband.weights.mid, cfg.specband.weights.high}}}},
           {"ta",
            {{"gamma", cfg.ta_gamma},
             {"eps", cfg.ta_eps},
             {"layer_weights", cfg.ta_layer_weights},
             {"default_layer_weight", cfg.ta_default_layer_weight}}},
           {"pipeline_version", kPipelineVersion}};
    if (include_workers) j["workers"] = cfg.workers;
    return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    RunConfig cfg;
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.crop512 = j.value("crop512", cfg.crop512);
    cfg.png_bit_depth = j.value("png_bit_depth", cfg.png_bit_depth);
    cfg.randomize_isp = j.value("randomize_isp", cfg.randomize_isp);
    if (j.contains("isp")) cfg.isp = isp_from_json(j.at("isp"));
    if (j.contains("synth")) {
        const json& s = j.at("synth");
        auto pair = [&](const char* key, double& lo, double& hi) {
            if (!s.contains(key)) return;
            const auto v = s.at(key).get<std::vector<double>>();
            if (v.size() != 2) throw std::invalid_argument(std::string("range needs two values: ") + key);
            lo = v[0];
            hi = v[1];
        };
        pair("period_px", cfg.ranges.period_min_px, cfg.ranges.period_max_px);
        pair("duty", cfg.ranges.duty_min, cfg.ranges.duty_max);
        pair("darkness", cfg.ranges.darkness_min, cfg.ranges.darkness_max);
        pair("jitter_amp", cfg.ranges.jitter_min, cfg.ranges.jitter_max);
        pair("orientation_deg", cfg.ranges.orientation_min_deg, cfg.ranges.orientation_max_deg);
        pair("curve_amp_px", cfg.ranges.curve_amp_min_px, cfg.ranges.curve_amp_max_px);
        pair("curve_wavelength_px", cfg.ranges.curve_wavelength_min_px, cfg.ranges.curve_wavelength_max_px);
        pair("crack_density", cfg.ranges.crack_density_min, cfg.ranges.crack_density_max);
        cfg.ranges.feather_min_px = s.value("feather_min_px", cfg.ranges.feather_min_px);
        cfg.ranges.feather_max_frac = s.value("feather_max_frac", cfg.ranges.feather_max_frac);
        cfg.ranges.gain_floor = s.value("gain_floor", cfg.ranges.gain_floor);
        if (s.contains("patterns")) {
            cfg.ranges.patterns.clear();
            for (const auto& name : s.at("patterns"))
                cfg.ranges.patterns.push_back(band_pattern_from_string(name.get<std::string>()));
            if (cfg.ranges.patterns.empty())
                throw std::invalid_argument("synth.patterns must not be empty");
        }
    }
    if (j.contains("specband")) {
        const json& b = j.at("specband");
        cfg.specband.rho1 = b.value("rho1", cfg.specband.rho1);
        cfg.specband.rho2 = b.value("rho2", cfg.specband.rho2);
        cfg.specband.order_n = b.value("order_n", cfg.specband.order_n);
        cfg.specband.eps = b.value("eps", cfg.specband.eps);
        cfg.specband.ref_size_m0 = b.value("ref_size_m0", cfg.specband.ref_size_m0);
        if (b.contains("weights")) {
            const auto w = b.at("weights").get<std::vector<double>>();
            if (w.size() != 3) throw std::invalid_argument("specband.weights needs three values");
            cfg.specband.weights = BandWeights{w[0], w[1], w[2]};
        }
    }
    if (j.contains("ta")) {
        const json& t = j.at("ta");
        cfg.ta_gamma = t.value("gamma", cfg.ta_gamma);
        cfg.ta_eps = t.value("eps", cfg.ta_eps);
        cfg.ta_default_layer_weight = t.value("default_layer_weight", cfg.ta_default_layer_weight);
        if (t.contains("layer_weights"))
            cfg.ta_layer_weights = t.at("layer_weights").get<std::map<std::string, double>>();
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

void save_config_snapshot(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config snapshot: " + path);
    out << config_to_json(cfg, /*include_workers=*/false);
}

std::uint64_t file_seed(std::uint64_t master_seed, const std::string& filename) {
    return hash_string(master_seed, filename);
}

BandingSpec draw_banding_spec(const SynthRanges& r, std::uint64_t seed) {
    SeededRng rng(hash_combine(seed, kSpecDrawStream));
    BandingSpec spec;
    const std::size_t pick =
        std::min(r.patterns.size() - 1, static_cast<std::size_t>(rng.next_unit() * r.patterns.size()));
    spec.pattern = r.patterns[pick];
    spec.period_px = std::exp(rng.uniform(std::log(r.period_min_px), std::log(r.period_max_px)));
    spec.duty = rng.uniform(r.duty_min, r.duty_max);
    spec.darkness = rng.uniform(r.darkness_min, r.darkness_max);
    spec.jitter_amp = rng.uniform(r.jitter_min, r.jitter_max);
    const double feather_hi = std::max(r.feather_min_px, r.feather_max_frac * spec.period_px);
    spec.feather_px = std::min(rng.uniform(r.feather_min_px, feather_hi), spec.period_px / 2.0);
    spec.orientation_deg = rng.uniform(r.orientation_min_deg, r.orientation_max_deg);
    spec.phase_px = rng.uniform(0.0, spec.period_px);
    spec.curve_amp_px = rng.uniform(r.curve_amp_min_px, r.curve_amp_max_px);
    spec.curve_wavelength_px = rng.uniform(r.curve_wavelength_min_px, r.curve_wavelength_max_px);
    spec.crack_density = rng.uniform(r.crack_density_min, r.crack_density_max);
    spec.gain_floor = r.gain_floor;
    spec.seed = seed;
    spec.validate();
    return spec;
}

int run_synth(const RunConfig& cfg) {
    if (cfg.input_dir.empty() || cfg.output_dir.empty())
        throw std::runtime_error("synth needs --input and --output directories");
    const std::vector<std::string> files = list_files(cfg.input_dir, ".png");
    fs::create_directories(cfg.output_dir);
    save_config_snapshot(cfg, (fs::path(cfg.output_dir) / "config_snapshot.json").string());

    std::vector<std::string> manifest_lines(files.size());
    FailureLog failures;
    const PngBitDepth depth = bit_depth_from_int(cfg.png_bit_depth);

    parallel_for(files.size(), effective_workers(cfg.workers), [&](std::size_t i) {
        const std::string& name = files[i];
        try {
            const fs::path src = fs::path(cfg.input_dir) / name;
            const fs::path dst = fs::path(cfg.output_dir) / name;
            const std::uint64_t seed = file_seed(cfg.master_seed, name);
            const BandingSpec spec = draw_banding_spec(cfg.ranges, seed);
            const IspParams isp =
                cfg.randomize_isp ? random_isp_params(hash_combine(seed, kIspDrawStream)) : cfg.isp;

            const ImagePlanes clean = load_image(src.string());
            auto [degraded, manifest] = synthesize_pair(clean, spec, isp);
            save_image(degraded, dst.string(), depth);

            json line{{"source_path", src.string()},
                      {"output_path", dst.string()},
                      {"seed", seed},
                      {"banding_spec", json::parse(manifest.banding_spec_json)},
                      {"pipeline_version", manifest.pipeline_version}};
            if (cfg.randomize_isp) line["isp"] = isp_to_json(isp);
            manifest_lines[i] = line.dump();
        } catch (const std::exception& e) {
            failures.add(name, e.what());
        }
    });

    std::ofstream manifest((fs::path(cfg.output_dir) / "manifest.jsonl").string());
    if (!manifest) throw std::runtime_error("cannot write manifest in " + cfg.output_dir);
    for (const std::string& line : manifest_lines)
        if (!line.empty()) manifest << line << "\n";

    std::cout << "synthesized " << files.size() - failures.entries.size() << "/" << files.size()
              << " pairs into " << cfg.output_dir << "\n";
    return finish(failures);
}

int run_decompose(const RunConfig& cfg) {
    if (cfg.input_dir.empty() || cfg.output_dir.empty())
        throw std::runtime_error("decompose needs --input and --output directories");
    const std::vector<std::string> files = list_files(cfg.input_dir, ".png");
    fs::create_directories(cfg.output_dir);
    save_config_snapshot(cfg, (fs::path(cfg.output_dir) / "config_snapshot.json").string());

    FailureLog failures;
    const PngBitDepth depth = bit_depth_from_int(cfg.png_bit_depth);

    // Offset signed band planes into [0,1] for PNG preview; the .mfrg dumps
    // keep the exact values.
    auto preview = [](const ImagePlanes& plane, float offset) {
        ImagePlanes out = plane;
        for (float& v : out.data()) v = std::clamp(v + offset, 0.0f, 1.0f);
        return out;
    };

    int cached_h = -1, cached_w = -1;
    BandPartition partition;
    for (const std::string& name : files) {
        try {
            const fs::path src = fs::path(cfg.input_dir) / name;
            const std::string stem = fs::path(name).stem().string();
            const ImagePlanes img = load_image(src.string());
            if (img.height() != cached_h || img.width() != cached_w) {
                partition = build_partition(img.height(), img.width(), cfg.specband.rho1, cfg.specband.rho2,
                                            cfg.specband.order_n, cfg.specband.eps, cfg.specband.weights,
                                            cfg.specband.ref_size_m0);
                cached_h = img.height();
                cached_w = img.width();
            }

            const BandComponents bands = decompose(img, partition);
            const ImagePlanes recomposed = recompose(img, partition);
            const fs::path out_base = fs::path(cfg.output_dir) / stem;

            save_mfrg(bands.low, out_base.string() + ".low.mfrg");
            save_mfrg(bands.mid, out_base.string() + ".mid.mfrg");
            save_mfrg(bands.high, out_base.string() + ".high.mfrg");
            save_image(preview(bands.low, 0.0f), out_base.string() + ".low.png", depth);
            save_image(preview(bands.mid, 0.5f), out_base.string() + ".mid.png", depth);
            save_image(preview(bands.high, 0.5f), out_base.string() + ".high.png", depth);
            save_image(recomposed, out_base.string() + ".recomposed.png", depth);

            const std::array<double, 4> energy = band_energies(img, partition);
            json sidecar{{"input", src.string()},
                         {"band_energy", {{"low", energy[0]}, {"mid", energy[1]}, {"high", energy[2]}}},
                         {"total_energy", energy[3]},
                         {"rho1_eff", partition.rho1_eff},
                         {"rho2_eff", partition.rho2_eff},
                         {"weights", {partition.weights.low, partition.weights.mid, partition.weights.high}}};
            std::ofstream side(out_base.string() + ".bands.json");
            side << sidecar.dump(2) << "\n";
        } catch (const std::exception& e) {
            failures.add(name, e.what());
        }
    }
    std::cout << "decomposed " << files.size() - failures.entries.size() << "/" << files.size()
              << " images into " << cfg.output_dir << "\n";
    return finish(failures);
}

int run_taloss(const RunConfig& cfg) {
    if (cfg.input_dir.empty())
        throw std::runtime_error("taloss needs an --input directory of .lq.mfg4/.gt.mfg4 pairs");

    std::vector<std::string> lq_names;
    for (const auto& entry : fs::directory_iterator(cfg.input_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 8 && name.ends_with(".lq.mfg4"))
            lq_names.push_back(name.substr(0, name.size() - 8));
    }
    std::sort(lq_names.begin(), lq_names.end());
    if (lq_names.empty()) throw std::runtime_error("no .lq.mfg4 fixtures in " + cfg.input_dir);

    TAConfig ta;
    ta.global_gamma = cfg.ta_gamma;
    ta.eps = cfg.ta_eps;

    std::vector<FeatureStack> lq_stacks, gt_stacks;
    for (const std::string& stem : lq_names) {
        const fs::path lq_path = fs::path(cfg.input_dir) / (stem + ".lq.mfg4");
        const fs::path gt_path = fs::path(cfg.input_dir) / (stem + ".gt.mfg4");
        if (!fs::exists(gt_path))
            throw std::runtime_error("missing ground-truth fixture: " + gt_path.string());
        FeatureStack lq = load_mfg4(lq_path.string());
        FeatureStack gt = load_mfg4(gt_path.string());
        lq.layer_id = gt.layer_id = stem;
        lq_stacks.push_back(std::move(lq));
        gt_stacks.push_back(std::move(gt));
        const auto it = cfg.ta_layer_weights.find(stem);
        ta.layer_weights[stem] = it != cfg.ta_layer_weights.end() ? it->second : cfg.ta_default_layer_weight;
    }

    json layers = json::array();
    for (std::size_t i = 0; i < lq_stacks.size(); ++i) {
        const double loss = layer_ta_loss(lq_stacks[i], gt_stacks[i], ta.eps);
        layers.push_back(json{{"layer", lq_stacks[i].layer_id},
                              {"weight", ta.layer_weights[lq_stacks[i].layer_id]},
                              {"loss", loss}});
    }
    const double total = total_ta_loss(lq_stacks, gt_stacks, ta);
    const json out{{"gamma", ta.global_gamma}, {"layers", layers}, {"total_ta", total}};
    std::cout << out.dump(2) << "\n";

    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        std::ofstream f((fs::path(cfg.output_dir) / "taloss.json").string());
        f << out.dump(2) << "\n";
    }
    return 0;
}

int run_evaluate(const RunConfig& cfg) {
    if (cfg.input_dir.empty() || cfg.ref_dir.empty())
        throw std::runtime_error("evaluate needs --input (restored) and --ref (ground truth) directories");

    const std::vector<std::string> restored = list_files(cfg.input_dir, ".png");
    const std::vector<std::string> reference = list_files(cfg.ref_dir, ".png");
    FailureLog failures;
    for (const std::string& name : reference)
        if (!std::binary_search(restored.begin(), restored.end(), name))
            failures.add(name, "present in --ref but not in --input");

    json rows = json::array();
    std::ostringstream csv;
    csv << "name,psnr_db,ssim,ms_ssim,gmsd\n";
    double mean_psnr = 0, mean_ssim = 0, mean_ms = 0, mean_gmsd = 0;
    int scored = 0;

    for (const std::string& name : restored) {
        try {
            const fs::path ref_path = fs::path(cfg.ref_dir) / name;
            if (!fs::exists(ref_path))
                throw std::runtime_error("present in --input but not in --ref");
            ImagePlanes a = load_image((fs::path(cfg.input_dir) / name).string());
            ImagePlanes b = load_image(ref_path.string());
            if (cfg.crop512) {
                a = center_crop(a, 512);
                b = center_crop(b, 512);
            }
            const MetricReport r = evaluate_pair(a, b);
            rows.push_back(json{{"name", name},
                                {"psnr_db", r.psnr_db},
                                {"ssim", r.ssim},
                                {"ms_ssim", r.ms_ssim},
                                {"gmsd", r.gmsd},
                                {"lpips", nullptr},
                                {"dists", nullptr},
                                {"fsim", nullptr}});
            csv << name << "," << r.psnr_db << "," << r.ssim << "," << r.ms_ssim << "," << r.gmsd << "\n";
            mean_psnr += r.psnr_db;
            mean_ssim += r.ssim;
            mean_ms += r.ms_ssim;
            mean_gmsd += r.gmsd;
            ++scored;
        } catch (const std::exception& e) {
            failures.add(name, e.what());
        }
    }

    if (scored > 0) {
        mean_psnr /= scored;
        mean_ssim /= scored;
        mean_ms /= scored;
        mean_gmsd /= scored;
        csv << "mean," << mean_psnr << "," << mean_ssim << "," << mean_ms << "," << mean_gmsd << "\n";
    }

    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        std::ofstream jl((fs::path(cfg.output_dir) / "metrics.jsonl").string());
        for (const auto& row : rows) jl << row.dump() << "\n";
        std::ofstream cs((fs::path(cfg.output_dir) / "summary.csv").string());
        cs << csv.str();
        save_config_snapshot(cfg, (fs::path(cfg.output_dir) / "config_snapshot.json").string());
    }

    std::cout << "scored " << scored << " pairs";
    if (scored > 0)
        std::cout << "  mean psnr=" << mean_psnr << " ssim=" << mean_ssim << " ms_ssim=" << mean_ms
                  << " gmsd=" << mean_gmsd;
    std::cout << "\n";
    return finish(failures);
}

} // namespace bandsim
