#include "sslv3/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace sslv3 {

void ClipSpec::validate() const {
    if (T < 1 || H < 1 || W < 1 || t < 1 || h < 1 || w < 1 || d < 1) {
        throw ValueError("clip spec extents must be positive");
    }
    if (t > T || h > H || w > W) {
        throw DimensionError("clip [" + std::to_string(T) + "," + std::to_string(H) + "," +
                             std::to_string(W) + "] smaller than one tubelet [" +
                             std::to_string(t) + "," + std::to_string(h) + "," +
                             std::to_string(w) + "]");
    }
}

std::vector<int> Dataset::distinct_subjects() const {
    std::set<int> s;
    for (const auto& c : clips) s.insert(c.subject);
    return {s.begin(), s.end()};
}

int Dataset::num_classes() const {
    int k = 0;
    for (const auto& c : clips) k = std::max(k, c.label + 1);
    return std::max(k, 2);
}

int Dataset::subject_label(int subject) const {
    int label = -1;
    for (const auto& c : clips) {
        if (c.subject != subject) continue;
        if (label < 0) {
            label = c.label;
        } else if (label != c.label) {
            throw DataError("subject " + std::to_string(subject) + " has conflicting labels");
        }
    }
    if (label < 0) throw ValueError("subject " + std::to_string(subject) + " not in dataset");
    return label;
}

ClipBatch make_batch(const Dataset& ds, const std::vector<int>& indices) {
    if (indices.empty()) throw ValueError("make_batch: empty index list");
    const int bs = static_cast<int>(indices.size());
    const int64_t per = ds.pixels_per_clip();
    auto clips = Tensor::zeros({bs, ds.T, ds.H, ds.W, 3});
    ClipBatch batch;
    batch.labels.resize(bs);
    batch.subject_ids.resize(bs);
    if (ds.synthetic) batch.true_quality = std::vector<double>(bs);
    for (int i = 0; i < bs; ++i) {
        const Clip& c = ds.clips.at(indices[i]);
        if (static_cast<int64_t>(c.pixels.size()) != per) {
            throw DataError("clip " + std::to_string(indices[i]) + " has wrong pixel count");
        }
        std::copy(c.pixels.begin(), c.pixels.end(), clips->data.begin() + i * per);
        batch.labels[i] = c.label;
        batch.subject_ids[i] = c.subject;
        if (batch.true_quality) (*batch.true_quality)[i] = c.quality;
    }
    batch.clips = clips;
    return batch;
}

void AugmentPolicy::validate() const {
    if (crop_fraction <= 0.0 || crop_fraction > 1.0) {
        throw ValueError("crop fraction must be in (0,1], got " + std::to_string(crop_fraction));
    }
    if (flip_prob < 0.0 || flip_prob > 1.0) throw ValueError("flip probability must be in [0,1]");
    if (rot_degrees < 0.0 || brightness < 0.0 || contrast < 0.0) {
        throw ValueError("augmentation ranges must be non-negative");
    }
}

AugmentPolicy AugmentPolicy::identity() {
    AugmentPolicy p;
    p.hflip = false;
    p.vflip = false;
    p.rot_degrees = 0.0;
    p.crop_fraction = 1.0;
    p.brightness = 0.0;
    p.contrast = 0.0;
    return p;
}

namespace {

// bilinear sample with zero fill outside the frame
double sample_frame(const double* frame, int H, int W, int ch, double y, double x) {
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0;
    const double fx = x - x0;
    auto px = [&](int yy, int xx) -> double {
        if (yy < 0 || yy >= H || xx < 0 || xx >= W) return 0.0;
        return frame[(static_cast<int64_t>(yy) * W + xx) * 3 + ch];
    };
    return px(y0, x0) * (1 - fy) * (1 - fx) + px(y0, x0 + 1) * (1 - fy) * fx +
           px(y0 + 1, x0) * fy * (1 - fx) + px(y0 + 1, x0 + 1) * fy * fx;
}

void flip_clip(std::vector<double>& pix, int T, int H, int W, bool horizontal) {
    for (int f = 0; f < T; ++f) {
        double* frame = pix.data() + static_cast<int64_t>(f) * H * W * 3;
        if (horizontal) {
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W / 2; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        std::swap(frame[(static_cast<int64_t>(y) * W + x) * 3 + c],
                                  frame[(static_cast<int64_t>(y) * W + (W - 1 - x)) * 3 + c]);
                    }
                }
            }
        } else {
            for (int y = 0; y < H / 2; ++y) {
                for (int x = 0; x < W; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        std::swap(frame[(static_cast<int64_t>(y) * W + x) * 3 + c],
                                  frame[(static_cast<int64_t>((H - 1 - y)) * W + x) * 3 + c]);
                    }
                }
            }
        }
    }
}

void resample_clip(std::vector<double>& pix, int T, int H, int W, double angle_rad,
                   double crop_fraction) {
    const double cy = (H - 1) / 2.0;
    const double cx = (W - 1) / 2.0;
    const double ca = std::cos(-angle_rad);
    const double sa = std::sin(-angle_rad);
    std::vector<double> out(pix.size());
    for (int f = 0; f < T; ++f) {
        const double* src = pix.data() + static_cast<int64_t>(f) * H * W * 3;
        double* dst = out.data() + static_cast<int64_t>(f) * H * W * 3;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                // crop maps the output grid into the central region, then the
                // inverse rotation finds the source position
                double py = cy + (y - cy) * crop_fraction;
                double px = cx + (x - cx) * crop_fraction;
                double sy = cy + (py - cy) * ca - (px - cx) * sa;
                double sx = cx + (py - cy) * sa + (px - cx) * ca;
                for (int c = 0; c < 3; ++c) {
                    dst[(static_cast<int64_t>(y) * W + x) * 3 + c] =
                        sample_frame(src, H, W, c, sy, sx);
                }
            }
        }
    }
    pix = std::move(out);
}

}  // namespace

ClipBatch augment(const ClipBatch& batch, const AugmentPolicy& policy, Rng& rng) {
    policy.validate();
    const int bs = batch.size();
    const Shape& shape = batch.clips->shape();
    const int T = shape[1], H = shape[2], W = shape[3];
    const int64_t per = static_cast<int64_t>(T) * H * W * 3;

    auto out = Tensor::zeros(shape);
    for (int i = 0; i < bs; ++i) {
        std::vector<double> pix(batch.clips->data.begin() + i * per,
                                batch.clips->data.begin() + (i + 1) * per);
        if (policy.hflip && rng.bernoulli(policy.flip_prob)) flip_clip(pix, T, H, W, true);
        if (policy.vflip && rng.bernoulli(policy.flip_prob)) flip_clip(pix, T, H, W, false);

        double angle = 0.0;
        if (policy.rot_degrees > 0.0) {
            angle = rng.uniform(-policy.rot_degrees, policy.rot_degrees) * std::numbers::pi / 180.0;
        }
        if (angle != 0.0 || policy.crop_fraction < 1.0) {
            resample_clip(pix, T, H, W, angle, policy.crop_fraction);
        }

        double db = policy.brightness > 0.0 ? rng.uniform(-policy.brightness, policy.brightness)
                                            : 0.0;
        double dc = policy.contrast > 0.0 ? rng.uniform(-policy.contrast, policy.contrast) : 0.0;
        if (db != 0.0 || dc != 0.0) {
            for (auto& v : pix) v = (v - 0.5) * (1.0 + dc) + 0.5 + db;
        }
        for (auto& v : pix) v = std::min(std::max(v, 0.0), 1.0);
        std::copy(pix.begin(), pix.end(), out->data.begin() + i * per);
    }

    ClipBatch res;
    res.clips = out;
    res.labels = batch.labels;
    res.subject_ids = batch.subject_ids;
    res.true_quality = batch.true_quality;
    return res;
}

// ---------------------------------------------------------------------------
// synthetic generation
// ---------------------------------------------------------------------------

namespace synth_detail {

std::vector<double> render_clean(int label, int T, int H, int W, Rng& rng) {
    std::vector<double> pix(static_cast<size_t>(T) * H * W * 3, 0.0);
    const double y0 = rng.uniform(0.35, 0.65) * H;
    const double x_start = (0.15 + rng.uniform(-0.05, 0.05)) * W;
    const double x_end = (0.85 + rng.uniform(-0.05, 0.05)) * W;
    const double amp = rng.uniform(0.85, 1.0);
    const double sigma = H / 7.0;
    const double bg = 0.08;
    const double chan[3] = {1.0, 0.8, 0.6};

    for (int f = 0; f < T; ++f) {
        const double u = T > 1 ? static_cast<double>(f) / (T - 1) : 0.0;
        const double xc = label == 0 ? x_start + (x_end - x_start) * u
                                     : x_end - (x_end - x_start) * u;
        double* frame = pix.data() + static_cast<int64_t>(f) * H * W * 3;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const double d2 =
                    (y - y0) * (y - y0) + (x - xc) * (x - xc);
                const double blob = amp * std::exp(-d2 / (2.0 * sigma * sigma));
                for (int c = 0; c < 3; ++c) {
                    double v = bg + blob * chan[c];
                    frame[(static_cast<int64_t>(y) * W + x) * 3 + c] =
                        std::min(std::max(v, 0.0), 1.0);
                }
            }
        }
    }
    return pix;
}

std::vector<double> degrade(const std::vector<double>& clean, int T, int H, int W, double q,
                            const SynthConfig& cfg, Rng& rng) {
    if (q >= 1.0) return clean;
    std::vector<double> pix = clean;

    const double sigma = (1.0 - q) * cfg.max_blur_sigma;
    if (sigma > 1e-12) {
        const int radius = static_cast<int>(std::ceil(3.0 * sigma));
        std::vector<double> kernel(2 * radius + 1);
        double ksum = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
            ksum += kernel[i + radius];
        }
        for (auto& k : kernel) k /= ksum;

        std::vector<double> tmp(pix.size());
        auto clampi = [](int v, int hi) { return std::min(std::max(v, 0), hi - 1); };
        for (int f = 0; f < T; ++f) {
            const int64_t base = static_cast<int64_t>(f) * H * W * 3;
            // horizontal pass
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        double s = 0.0;
                        for (int i = -radius; i <= radius; ++i) {
                            s += kernel[i + radius] *
                                 pix[base + (static_cast<int64_t>(y) * W + clampi(x + i, W)) * 3 +
                                     c];
                        }
                        tmp[base + (static_cast<int64_t>(y) * W + x) * 3 + c] = s;
                    }
                }
            }
            // vertical pass
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        double s = 0.0;
                        for (int i = -radius; i <= radius; ++i) {
                            s += kernel[i + radius] *
                                 tmp[base + (static_cast<int64_t>(clampi(y + i, H)) * W + x) * 3 +
                                     c];
                        }
                        pix[base + (static_cast<int64_t>(y) * W + x) * 3 + c] = s;
                    }
                }
            }
        }
    }

    const double amp = (1.0 - q) * cfg.max_noise;
    if (amp > 0.0) {
        for (auto& v : pix) v += rng.uniform(-amp, amp);
    }
    for (auto& v : pix) v = std::min(std::max(v, 0.0), 1.0);
    return pix;
}

}  // namespace synth_detail

Dataset synth_generate(const SynthConfig& cfg, const ClipSpec& spec, Rng& rng) {
    if (cfg.n_subjects < 2) throw ValueError("synth_generate: need at least 2 subjects");
    if (cfg.clips_per_subject < 1) throw ValueError("synth_generate: need at least 1 clip");
    if (cfg.quality_lo > cfg.quality_hi) {
        throw ValueError("synth_generate: empty quality range [" +
                         std::to_string(cfg.quality_lo) + "," + std::to_string(cfg.quality_hi) +
                         "]");
    }
    spec.validate();

    Dataset ds;
    ds.T = spec.T;
    ds.H = spec.H;
    ds.W = spec.W;
    ds.synthetic = true;
    for (int s = 0; s < cfg.n_subjects; ++s) {
        const int label = s % 2;
        for (int c = 0; c < cfg.clips_per_subject; ++c) {
            Clip clip;
            clip.subject = s;
            clip.label = label;
            auto clean = synth_detail::render_clean(label, ds.T, ds.H, ds.W, rng);
            clip.quality = rng.uniform(cfg.quality_lo, cfg.quality_hi);
            clip.pixels = synth_detail::degrade(clean, ds.T, ds.H, ds.W, clip.quality, cfg, rng);
            ds.clips.push_back(std::move(clip));
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// subject-disjoint folds
// ---------------------------------------------------------------------------

std::vector<FoldSplit> kfold_split(const std::vector<int>& subject_ids,
                                   const std::vector<int>& subject_labels, int K, Rng& rng) {
    if (subject_ids.size() != subject_labels.size()) {
        throw ValueError("kfold_split: ids and labels differ in length");
    }
    std::map<int, int> label_of;
    for (size_t i = 0; i < subject_ids.size(); ++i) {
        auto [it, inserted] = label_of.emplace(subject_ids[i], subject_labels[i]);
        if (!inserted && it->second != subject_labels[i]) {
            throw DataError("subject " + std::to_string(subject_ids[i]) +
                            " has conflicting labels");
        }
    }
    const int n = static_cast<int>(label_of.size());
    if (K < 2) throw ValueError("kfold_split: need K >= 2, got " + std::to_string(K));
    if (K > n) {
        throw ValueError("kfold_split: K=" + std::to_string(K) + " exceeds " +
                         std::to_string(n) + " subjects");
    }

    // group subjects by class, shuffle within class, deal round-robin with a
    // single cursor so fold sizes stay balanced
    std::map<int, std::vector<int>> by_class;
    for (const auto& [subj, label] : label_of) by_class[label].push_back(subj);

    std::vector<std::vector<int>> folds(K);
    int cursor = 0;
    for (auto& [label, members] : by_class) {
        for (int i = static_cast<int>(members.size()) - 1; i > 0; --i) {
            std::swap(members[i], members[rng.below(i + 1)]);
        }
        for (int subj : members) {
            folds[cursor % K].push_back(subj);
            ++cursor;
        }
    }

    std::vector<FoldSplit> out(K);
    for (int k = 0; k < K; ++k) {
        std::sort(folds[k].begin(), folds[k].end());
        out[k].test_subjects = folds[k];
        for (int j = 0; j < K; ++j) {
            if (j == k) continue;
            out[k].train_subjects.insert(out[k].train_subjects.end(), folds[j].begin(),
                                         folds[j].end());
        }
        std::sort(out[k].train_subjects.begin(), out[k].train_subjects.end());
    }
    return out;
}

std::vector<int> clips_of_subjects(const Dataset& ds, const std::vector<int>& subjects) {
    std::set<int> wanted(subjects.begin(), subjects.end());
    std::vector<int> out;
    for (size_t i = 0; i < ds.clips.size(); ++i) {
        if (wanted.count(ds.clips[i].subject)) out.push_back(static_cast<int>(i));
    }
    return out;
}

// ---------------------------------------------------------------------------
// on-disk formats
// ---------------------------------------------------------------------------

namespace {

void write_u64_le(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64_le(std::ostream& os, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64_le(os, bits);
}

double read_f64_le(std::istream& is) {
    uint64_t bits = read_u64_le(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace

void dataset_save(const Dataset& ds, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "clips");
    {
        std::ofstream meta(fs::path(dir) / "meta.txt");
        meta << "T=" << ds.T << "\nH=" << ds.H << "\nW=" << ds.W
             << "\nsynthetic=" << (ds.synthetic ? 1 : 0) << "\ncount=" << ds.clips.size() << "\n";
    }
    std::ofstream index(fs::path(dir) / "index.tsv");
    index << "clip_id\tsubject_id\tlabel\ttrue_quality\tfile\n";
    char buf[64];
    for (size_t i = 0; i < ds.clips.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "clips/clip_%06zu.raw", i);
        const Clip& c = ds.clips[i];
        std::snprintf(buf + 32, 32, "%.17g", c.quality);
        index << i << '\t' << c.subject << '\t' << c.label << '\t' << (buf + 32) << '\t' << buf
              << '\n';
        std::ofstream raw(fs::path(dir) / buf, std::ios::binary);
        for (double v : c.pixels) write_f64_le(raw, v);
    }
}

Dataset dataset_load(const std::string& dir) {
    std::ifstream meta(fs::path(dir) / "meta.txt");
    if (!meta) throw DataError("dataset_load: missing meta.txt in " + dir);
    Dataset ds;
    size_t count = 0;
    std::string line;
    while (std::getline(meta, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "T") ds.T = std::stoi(val);
        else if (key == "H") ds.H = std::stoi(val);
        else if (key == "W") ds.W = std::stoi(val);
        else if (key == "synthetic") ds.synthetic = val == "1";
        else if (key == "count") count = std::stoul(val);
    }
    if (ds.T < 1 || ds.H < 1 || ds.W < 1) throw DataError("dataset_load: bad meta.txt in " + dir);

    std::ifstream index(fs::path(dir) / "index.tsv");
    if (!index) throw DataError("dataset_load: missing index.tsv in " + dir);
    std::getline(index, line);  // header
    const int64_t per = ds.pixels_per_clip();
    while (std::getline(index, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        size_t clip_id;
        Clip c;
        std::string file;
        if (!(row >> clip_id >> c.subject >> c.label >> c.quality >> file)) {
            throw DataError("dataset_load: malformed index row: " + line);
        }
        std::ifstream raw(fs::path(dir) / file, std::ios::binary);
        if (!raw) throw DataError("dataset_load: missing clip file " + file);
        c.pixels.resize(per);
        for (int64_t i = 0; i < per; ++i) c.pixels[i] = read_f64_le(raw);
        if (!raw) throw DataError("dataset_load: truncated clip file " + file);
        ds.clips.push_back(std::move(c));
    }
    if (ds.clips.size() != count) {
        throw DataError("dataset_load: index lists " + std::to_string(ds.clips.size()) +
                        " clips, meta.txt says " + std::to_string(count));
    }
    return ds;
}

namespace {

// Binary PGM (P5) / PPM (P6), maxval <= 255. Returns RGB in [0,1].
std::vector<double> read_frame(const fs::path& path, int& H, int& W) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open frame " + path.string());
    std::string magic;
    f >> magic;
    if (magic != "P5" && magic != "P6") {
        throw DataError("frame " + path.string() + " is not binary PGM/PPM");
    }
    auto next_int = [&]() -> int {
        // skips whitespace and '#' comments
        while (true) {
            int ch = f.peek();
            if (ch == '#') {
                std::string junk;
                std::getline(f, junk);
            } else if (std::isspace(ch)) {
                f.get();
            } else {
                break;
            }
        }
        int v;
        if (!(f >> v)) throw DataError("frame " + path.string() + " has a malformed header");
        return v;
    };
    const int w = next_int();
    const int h = next_int();
    const int maxval = next_int();
    if (maxval < 1 || maxval > 255) {
        throw DataError("frame " + path.string() + " has unsupported maxval " +
                        std::to_string(maxval));
    }
    f.get();  // single whitespace after maxval
    const int channels = magic == "P6" ? 3 : 1;
    std::vector<unsigned char> raw(static_cast<size_t>(w) * h * channels);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!f) throw DataError("frame " + path.string() + " is truncated");

    H = h;
    W = w;
    std::vector<double> out(static_cast<size_t>(w) * h * 3);
    for (int64_t i = 0; i < static_cast<int64_t>(w) * h; ++i) {
        for (int c = 0; c < 3; ++c) {
            const unsigned char byte = channels == 3 ? raw[i * 3 + c] : raw[i];
            out[i * 3 + c] = static_cast<double>(byte) / maxval;
        }
    }
    return out;
}

}  // namespace

Dataset load_clips(const std::string& manifest_path, int frames, int stride) {
    if (frames < 1) throw ValueError("load_clips: window must be at least 1 frame");
    if (stride == 0) stride = frames;  // non-overlapping default
    if (stride < 1) throw ValueError("load_clips: stride must be positive");

    std::ifstream manifest(manifest_path);
    if (!manifest) throw DataError("cannot open manifest " + manifest_path);
    const fs::path root = fs::path(manifest_path).parent_path();

    Dataset ds;
    std::string line;
    int line_no = 0;
    while (std::getline(manifest, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string video_id, rel_dir;
        int subject, label;
        if (!(row >> video_id >> subject >> label >> rel_dir)) {
            throw DataError("malformed manifest record at " + manifest_path + ":" +
                            std::to_string(line_no));
        }

        // when frames live under a numeric class directory, it must agree
        // with the manifest label
        const fs::path rel(rel_dir);
        if (rel.has_parent_path()) {
            const std::string head = rel.begin()->string();
            if (!head.empty() && std::all_of(head.begin(), head.end(),
                                             [](char c) { return std::isdigit(c); })) {
                if (std::stoi(head) != label) {
                    throw DataError("manifest label " + std::to_string(label) + " for video " +
                                    video_id + " does not match directory '" + head + "'");
                }
            }
        }

        const fs::path dir = root / rel;
        if (!fs::is_directory(dir)) {
            throw DataError("frame directory " + dir.string() + " for video " + video_id +
                            " does not exist");
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const auto ext = entry.path().extension().string();
            if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        const int n = static_cast<int>(files.size());
        if (n < frames) {
            std::cerr << "warning: video " << video_id << " has " << n << " frames, fewer than "
                      << frames << "; skipped\n";
            continue;
        }

        std::vector<std::vector<double>> frame_data(n);
        for (int i = 0; i < n; ++i) {
            int h = 0, w = 0;
            frame_data[i] = read_frame(files[i], h, w);
            if (ds.T == 0 && ds.H == 0) {
                ds.H = h;
                ds.W = w;
            } else if (h != ds.H || w != ds.W) {
                throw DataError("frame " + files[i].string() + " is " + std::to_string(w) + "x" +
                                std::to_string(h) + ", expected " + std::to_string(ds.W) + "x" +
                                std::to_string(ds.H));
            }
        }
        ds.T = frames;

        for (int start = 0; start + frames <= n; start += stride) {
            Clip clip;
            clip.subject = subject;
            clip.label = label;
            clip.pixels.reserve(static_cast<size_t>(frames) * ds.H * ds.W * 3);
            for (int f = start; f < start + frames; ++f) {
                clip.pixels.insert(clip.pixels.end(), frame_data[f].begin(), frame_data[f].end());
            }
            ds.clips.push_back(std::move(clip));
        }
    }
    return ds;
}

}  // namespace sslv3
