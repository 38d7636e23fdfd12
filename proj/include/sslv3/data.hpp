#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sslv3/rng.hpp"
#include "sslv3/tensor.hpp"

namespace sslv3 {

/// Geometry of one clip and its tubelet decomposition. Token counts use
/// floor division; remainder frames/pixels are discarded.
struct ClipSpec {
    int T = 16, H = 32, W = 32;  // clip extents
    int t = 4, h = 8, w = 8;     // tubelet extents
    int d = 32;                  // feature dimension

    int n_t() const { return T / t; }
    int n_h() const { return H / h; }
    int n_w() const { return W / w; }
    int spatial_tokens() const { return n_h() * n_w(); }
    int cube_dim() const { return t * h * w * 3; }

    void validate() const;
};

/// One video clip: pixels in [0,1], row-major [T,H,W,3].
struct Clip {
    std::vector<double> pixels;
    int subject = 0;
    int label = 0;
    double quality = -1.0;  // ground truth, synthetic data only; < 0 = absent
};

struct Dataset {
    int T = 0, H = 0, W = 0;
    bool synthetic = false;
    std::vector<Clip> clips;

    int64_t pixels_per_clip() const { return static_cast<int64_t>(T) * H * W * 3; }
    std::vector<int> distinct_subjects() const;
    int num_classes() const;
    /// Ground-truth class of a subject; all clips of one subject must agree.
    int subject_label(int subject) const;
};

/// A mini-batch assembled for the model: clips as one [bs,T,H,W,3] tensor
/// plus aligned per-clip metadata.
struct ClipBatch {
    TensorPtr clips;  // constant input, not a parameter
    std::vector<int> labels;
    std::vector<int> subject_ids;
    std::optional<std::vector<double>> true_quality;

    int size() const { return static_cast<int>(labels.size()); }
};

/// Builds a batch from dataset rows. Validates pixel range on synthetic data.
ClipBatch make_batch(const Dataset& ds, const std::vector<int>& indices);

struct AugmentPolicy {
    bool hflip = false;  // horizontal flip mirrors motion direction; off by default
    bool vflip = true;
    double flip_prob = 0.5;
    double rot_degrees = 10.0;    // 0 disables
    double crop_fraction = 0.9;   // 1 disables
    double brightness = 0.1;      // additive delta range; 0 disables
    double contrast = 0.1;        // multiplicative delta range; 0 disables

    void validate() const;
    static AugmentPolicy identity();
};

/// Per-clip independent augmentation draws. Labels, subject ids and quality
/// pass through; output pixels are clamped to [0,1].
ClipBatch augment(const ClipBatch& batch, const AugmentPolicy& policy, Rng& rng);

struct SynthConfig {
    int n_subjects = 20;
    int clips_per_subject = 10;
    double quality_lo = 0.2;
    double quality_hi = 1.0;
    // degradation constants: blur sigma and noise amplitude at quality 0
    double max_blur_sigma = 1.5;
    double max_noise = 0.15;
};

/// Two-class synthetic clips: a bright blob translating left-to-right
/// (class 0) or right-to-left (class 1), degraded by Gaussian blur plus
/// pixel noise scaled by (1 - quality). Pure function of the rng seed.
Dataset synth_generate(const SynthConfig& cfg, const ClipSpec& spec, Rng& rng);

namespace synth_detail {
/// Clean (pre-degradation) clip for one label draw.
std::vector<double> render_clean(int label, int T, int H, int W, Rng& rng);
/// Blur + noise at the given quality; q = 1 returns the input untouched.
std::vector<double> degrade(const std::vector<double>& clean, int T, int H, int W, double q,
                            const SynthConfig& cfg, Rng& rng);
}  // namespace synth_detail

/// Subject-disjoint K-fold partition, class-stratified where possible.
/// Returns (train_subjects, test_subjects) per fold.
struct FoldSplit {
    std::vector<int> train_subjects;
    std::vector<int> test_subjects;
};
std::vector<FoldSplit> kfold_split(const std::vector<int>& subject_ids,
                                   const std::vector<int>& subject_labels, int K, Rng& rng);

/// Row indices of all clips whose subject is in `subjects`.
std::vector<int> clips_of_subjects(const Dataset& ds, const std::vector<int>& subjects);

// ---- on-disk formats ----

/// Synthetic layout: raw little-endian f64 tensors, one file per clip, plus a
/// sidecar index (clip_id, subject_id, label, true_quality, file).
void dataset_save(const Dataset& ds, const std::string& dir);
Dataset dataset_load(const std::string& dir);

/// Frame-directory layout: UTF-8 manifest (video_id, subject_id, label,
/// relative frame directory) over zero-padded numbered PGM/PPM frames.
/// Clips are consecutive frame windows of `frames` (default 16) with the
/// given stride; videos shorter than one window yield no clips.
Dataset load_clips(const std::string& manifest_path, int frames = 16, int stride = 0);

}  // namespace sslv3
