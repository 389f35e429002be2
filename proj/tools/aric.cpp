// aric: train VQ codebooks, encode/decode images against them, benchmark
// rate/distortion over a corpus, and sample the coding model as a generator.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "aric/aric.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int exit_code_for(aric::Err code) {
    switch (code) {
        case aric::Err::Usage:
        case aric::Err::Dimension:
        case aric::Err::Training: return 2;
        case aric::Err::Io: return 3;
        case aric::Err::Format:
        case aric::Err::Corruption: return 4;
        case aric::Err::HashMismatch: return 5;
    }
    return 2;
}

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

struct CropSpec {
    int w = 0, h = 0;  // 0 = default policy (crop to at most 512x512)
};

CropSpec parse_crop(const std::string& s) {
    CropSpec c;
    if (s.empty()) return c;
    size_t x = s.find('x');
    if (x == std::string::npos) x = s.find('X');
    if (x == std::string::npos || x == 0 || x + 1 >= s.size())
        aric::fail(aric::Err::Usage, "crop must look like 512x512");
    try {
        c.w = std::stoi(s.substr(0, x));
        c.h = std::stoi(s.substr(x + 1));
    } catch (const std::exception&) {
        aric::fail(aric::Err::Usage, "crop must look like 512x512");
    }
    if (c.w < 1 || c.h < 1) aric::fail(aric::Err::Usage, "crop must be positive");
    return c;
}

aric::Image crop_for_coding(const aric::Image& img, const CropSpec& crop) {
    if (crop.w > 0) return aric::center_crop(img, crop.w, crop.h);
    // default policy: center-crop anything larger than 512 on a side
    int w = std::min(img.width, 512), h = std::min(img.height, 512);
    if (w == img.width && h == img.height) return img;
    return aric::center_crop(img, w, h);
}

std::vector<fs::path> list_images(const std::string& dir) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
    }
    if (ec) aric::fail(aric::Err::Io, "cannot list " + dir);
    std::sort(files.begin(), files.end());
    return files;
}

int default_model_for(int mode) { return mode == 0 ? aric::kModelRaster : aric::kModelScaleParentWest; }

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// ---- codebook ----------------------------------------------------------

struct CodebookArgs {
    std::string train_dir, out;
    uint32_t size = 4096;
    int patch = 8;
    uint64_t seed = 1;
    bool multiscale = false;
};

int run_codebook(const CodebookArgs& a) {
    auto files = list_images(a.train_dir);
    if (files.empty()) aric::fail(aric::Err::Usage, "no .ppm/.pgm files in " + a.train_dir);
    if (a.size < 2) aric::fail(aric::Err::Usage, "codebook size must be at least 2");

    std::vector<double> features;
    size_t count = 0;
    int channels = 0;
    for (const auto& f : files) {
        aric::Image img = aric::load_image(f.string());
        if (channels == 0) channels = img.channels;
        if (img.channels != channels)
            aric::fail(aric::Err::Usage, "mixed gray/color training images");
        int cw = (img.width / a.patch) * a.patch, ch = (img.height / a.patch) * a.patch;
        if (cw == 0 || ch == 0) continue;
        aric::FeatureMap fm =
            aric::extract_features(aric::center_crop(img, cw, ch), a.patch);
        features.insert(features.end(), fm.data.begin(), fm.data.end());
        count += fm.count();
    }
    aric::Codebook cb =
        aric::train_codebook(features, count, a.size, static_cast<uint8_t>(a.patch),
                             static_cast<uint8_t>(channels), a.seed, a.multiscale);
    cb.save(a.out);
    std::cout << "codebook_id=" << cb.id << "\n"
              << "vectors=" << cb.size << "\n"
              << "dim=" << cb.dim << "\n"
              << "training_patches=" << count << "\n";
    return 0;
}

// ---- encode / decode ---------------------------------------------------

struct EncodeArgs {
    std::string input, codebook, out, crop;
    int mode = 0;
    int model = -1;
};

int run_encode(const EncodeArgs& a) {
    aric::Codebook cb = aric::Codebook::load(a.codebook);
    aric::Image img = crop_for_coding(aric::load_image(a.input), parse_crop(a.crop));
    int model = a.model >= 0 ? a.model : default_model_for(a.mode);

    auto t0 = Clock::now();
    aric::EncodeResult res = aric::encode_image(img, cb, a.mode, model);
    auto t1 = Clock::now();
    aric::write_file(a.out, res.bytes);

    const aric::RateReport& r = res.report;
    std::cout << "bpp_payload=" << fmt(r.bpp_payload) << "\n"
              << "bpp_total=" << fmt(r.bpp_total) << "\n"
              << "tokenizer_ratio=" << fmt(r.tokenizer_ratio) << "\n"
              << "ar_ratio=" << fmt(r.ar_ratio) << "\n"
              << "overall_ratio=" << fmt(r.overall_ratio) << "\n"
              << "n_tokens=" << r.n_tokens << "\n"
              << "ideal_bits=" << fmt(r.ideal_bits, "%.3f") << "\n"
              << "payload_bits=" << r.payload_bits << "\n"
              << "header_bits=" << r.header_bits << "\n"
              << "enc_ms=" << fmt(ms_between(t0, t1), "%.3f") << "\n";
    return 0;
}

struct DecodeArgs {
    std::string input, codebook, out;
};

int run_decode(const DecodeArgs& a) {
    aric::Codebook cb = aric::Codebook::load(a.codebook);
    auto bytes = aric::read_file(a.input);
    auto t0 = Clock::now();
    aric::Image img = aric::decode_image(bytes, cb);
    auto t1 = Clock::now();
    aric::save_image(a.out, img);
    std::cout << "dec_ms=" << fmt(ms_between(t0, t1), "%.3f") << "\n";
    return 0;
}

// ---- bench -------------------------------------------------------------

struct BenchArgs {
    std::string corpus, out, crop;
    std::vector<std::string> codebooks;
    std::vector<int> modes = {0};
    std::vector<int> models = {0, 1};
    int jobs = 1;
};

struct BenchRow {
    std::string file;
    int mode = 0, model = 0;
    uint32_t v = 0;
    int patch = 0;
    double bpp_payload = 0, bpp_total = 0, psnr = 0, msssim = 0;
    double tokenizer_ratio = 0, ar_ratio = 0, overall_ratio = 0;
    double enc_ms = 0, dec_ms = 0;
};

int run_bench(const BenchArgs& a) {
    std::vector<aric::Codebook> codebooks;
    for (const auto& path : a.codebooks) codebooks.push_back(aric::Codebook::load(path));
    if (codebooks.empty()) aric::fail(aric::Err::Usage, "at least one --codebook is required");
    for (int m : a.modes)
        if (m != 0 && m != 1) aric::fail(aric::Err::Usage, "modes must be 0 or 1");
    for (int m : a.models)
        if (!aric::valid_model_id(m)) aric::fail(aric::Err::Usage, "models must be in 0..3");
    if (std::find(a.modes.begin(), a.modes.end(), 1) != a.modes.end())
        for (const auto& cb : codebooks)
            if (!cb.zero_reserved)
                aric::fail(aric::Err::Usage, "mode 1 requires --multiscale codebooks");

    auto files = list_images(a.corpus);
    if (files.empty()) aric::fail(aric::Err::Usage, "no .ppm/.pgm files in " + a.corpus);
    CropSpec crop = parse_crop(a.crop);

    struct Task {
        const fs::path* file;
        const aric::Codebook* cb;
        int mode, model;
    };
    std::vector<Task> tasks;
    for (const auto& f : files)
        for (const auto& cb : codebooks)
            for (int mode : a.modes)
                for (int model : a.models) tasks.push_back({&f, &cb, mode, model});

    int jobs = a.jobs;
    if (const char* env = std::getenv("ARIC_NO_PARALLEL"); env && std::string(env) == "1")
        jobs = 1;
    jobs = std::clamp(jobs, 1, 64);

    std::vector<BenchRow> rows(tasks.size());
    std::atomic<size_t> next{0};
    std::mutex fail_mu;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const Task& t = tasks[i];
                aric::Image img = crop_for_coding(aric::load_image(t.file->string()), crop);
                auto t0 = Clock::now();
                aric::EncodeResult enc = aric::encode_image(img, *t.cb, t.mode, t.model);
                auto t1 = Clock::now();
                aric::Image dec = aric::decode_image(enc.bytes, *t.cb);
                auto t2 = Clock::now();

                aric::Image cropped = aric::detail::crop_to_patch_multiple(img, t.cb->patch_size);
                BenchRow& row = rows[i];
                row.file = t.file->filename().string();
                row.mode = t.mode;
                row.model = t.model;
                row.v = t.cb->size;
                row.patch = t.cb->patch_size;
                row.bpp_payload = enc.report.bpp_payload;
                row.bpp_total = enc.report.bpp_total;
                row.psnr = aric::psnr(cropped, dec);
                row.msssim = aric::ms_ssim(cropped, dec);
                row.tokenizer_ratio = enc.report.tokenizer_ratio;
                row.ar_ratio = enc.report.ar_ratio;
                row.overall_ratio = enc.report.overall_ratio;
                row.enc_ms = ms_between(t0, t1);
                row.dec_ms = ms_between(t1, t2);
            } catch (...) {
                std::lock_guard<std::mutex> lock(fail_mu);
                if (!first_error) first_error = std::current_exception();
                next.store(tasks.size());
                return;
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::sort(rows.begin(), rows.end(), [](const BenchRow& x, const BenchRow& y) {
        return std::tie(x.file, x.mode, x.model, x.v) < std::tie(y.file, y.mode, y.model, y.v);
    });

    std::string csv =
        "file,mode,model,V,patch,bpp_payload,bpp_total,psnr,msssim,tokenizer_ratio,ar_ratio,"
        "overall_ratio,enc_ms,dec_ms\n";
    for (const BenchRow& r : rows) {
        csv += r.file + "," + std::to_string(r.mode) + "," + std::to_string(r.model) + "," +
               std::to_string(r.v) + "," + std::to_string(r.patch) + "," + fmt(r.bpp_payload) +
               "," + fmt(r.bpp_total) + "," + fmt(r.psnr) + "," + fmt(r.msssim) + "," +
               fmt(r.tokenizer_ratio) + "," + fmt(r.ar_ratio) + "," + fmt(r.overall_ratio) + "," +
               fmt(r.enc_ms, "%.3f") + "," + fmt(r.dec_ms, "%.3f") + "\n";
    }
    if (a.out.empty() || a.out == "-") {
        std::cout << csv;
    } else {
        std::vector<uint8_t> bytes(csv.begin(), csv.end());
        aric::write_file(a.out, bytes);
    }
    return 0;
}

// ---- sample ------------------------------------------------------------

struct SampleArgs {
    std::string codebook, out, size = "256x256";
    int mode = 0;
    int model = -1;
    uint64_t seed = 1;
    double temp = 1.0;
};

int run_sample(const SampleArgs& a) {
    aric::Codebook cb = aric::Codebook::load(a.codebook);
    CropSpec sz = parse_crop(a.size);
    int model = a.model >= 0 ? a.model : default_model_for(a.mode);
    aric::Image img = aric::sample_unconditional(cb, a.mode, model, sz.w, sz.h, a.seed, a.temp);
    aric::save_image(a.out, img);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vector-quantized image codec with adaptive context-model entropy coding"};
    app.require_subcommand(1);
    app.set_config("--config");

    CodebookArgs cba;
    auto* cmd_cb = app.add_subcommand("codebook", "train a VQ codebook on a directory of images");
    cmd_cb->add_option("--train-dir", cba.train_dir, "directory of .ppm/.pgm training images")
        ->required();
    cmd_cb->add_option("--size", cba.size, "codebook size V")->check(CLI::Range(2u, 1u << 18));
    cmd_cb->add_option("--patch", cba.patch, "patch size in pixels")->check(CLI::Range(1, 64));
    cmd_cb->add_option("--seed", cba.seed, "training seed");
    cmd_cb->add_option("--out", cba.out, "output .arcb path")->required();
    cmd_cb->add_flag("--multiscale", cba.multiscale, "reserve entry 0 as the zero vector");

    EncodeArgs ea;
    auto* cmd_enc = app.add_subcommand("encode", "encode a .ppm/.pgm image");
    cmd_enc->add_option("input", ea.input, "input image")->required();
    cmd_enc->add_option("--codebook", ea.codebook, "codebook .arcb path")->required();
    cmd_enc->add_option("--mode", ea.mode, "0 = next-token raster, 1 = next-scale")
        ->check(CLI::Range(0, 1));
    cmd_enc->add_option("--model", ea.model, "context model id 0..3")->check(CLI::Range(0, 3));
    cmd_enc->add_option("--crop", ea.crop, "center-crop WxH before coding (default: cap at 512x512)");
    cmd_enc->add_option("--out", ea.out, "output .aric path")->required();

    DecodeArgs da;
    auto* cmd_dec = app.add_subcommand("decode", "decode a .aric bitstream");
    cmd_dec->add_option("input", da.input, "input bitstream")->required();
    cmd_dec->add_option("--codebook", da.codebook, "codebook .arcb path")->required();
    cmd_dec->add_option("--out", da.out, "output image path")->required();

    BenchArgs ba;
    auto* cmd_bench = app.add_subcommand("bench", "rate/distortion sweep over a corpus, CSV out");
    cmd_bench->add_option("--corpus", ba.corpus, "directory of images")->required();
    cmd_bench->add_option("--codebook", ba.codebooks, "codebook path (repeatable)")->required();
    cmd_bench->add_option("--modes", ba.modes, "coding modes to sweep");
    cmd_bench->add_option("--models", ba.models, "model ids to sweep");
    cmd_bench->add_option("--out", ba.out, "output CSV path ('-' for stdout)");
    cmd_bench->add_option("--crop", ba.crop, "center-crop WxH (default: cap at 512x512)");
    cmd_bench->add_option("--jobs", ba.jobs, "parallel workers")->check(CLI::Range(1, 64));

    SampleArgs sa;
    auto* cmd_sample = app.add_subcommand("sample", "draw an image from the coding model");
    cmd_sample->add_option("--codebook", sa.codebook, "codebook .arcb path")->required();
    cmd_sample->add_option("--mode", sa.mode, "0 or 1")->check(CLI::Range(0, 1));
    cmd_sample->add_option("--model", sa.model, "context model id 0..3")->check(CLI::Range(0, 3));
    cmd_sample->add_option("--size", sa.size, "output size WxH");
    cmd_sample->add_option("--seed", sa.seed, "sampling seed");
    cmd_sample->add_option("--temp", sa.temp, "sampling temperature > 0");
    cmd_sample->add_option("--out", sa.out, "output image path")->required();

    try {
        app.parse(argc, argv);
        if (cmd_cb->parsed()) return run_codebook(cba);
        if (cmd_enc->parsed()) return run_encode(ea);
        if (cmd_dec->parsed()) return run_decode(da);
        if (cmd_bench->parsed()) return run_bench(ba);
        if (cmd_sample->parsed()) return run_sample(sa);
        return 2;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const aric::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
