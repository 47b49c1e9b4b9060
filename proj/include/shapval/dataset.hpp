#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shapval/seed_tree.hpp"

namespace shapval {

// Training split (the player set) plus a held-out evaluation split used for
// every utility measurement. Rows are dense row-major doubles.
struct Dataset {
    std::string name;
    int dim = 0;
    int n_classes = 0;
    std::vector<double> train_x;
    std::vector<int> train_y;
    std::vector<double> eval_x;
    std::vector<int> eval_y;

    int train_count() const { return static_cast<int>(train_y.size()); }
    int eval_count() const { return static_cast<int>(eval_y.size()); }
    std::span<const double> train_row(int i) const { return {train_x.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> eval_row(int i) const { return {eval_x.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)}; }

    // throws on violated invariants (sizes, label range, split shapes)
    void validate() const;
    // content fingerprint over both splits; used to align result artifacts
    std::uint64_t content_hash() const;
    std::string summary_json() const;
};

// Numeric CSV with a header row; the named column becomes the label, the rest
// the features. Rows are split train/eval by a seeded shuffle and features are
// standardized with train-split statistics only (variance floor 1e-12).
Dataset load_csv(const std::string& path, const std::string& label_column, double eval_fraction,
                 const SeedTree& seeds);

enum class SynthKind {
    GaussianBlobs,
    TwoClassImages,
};

struct SynthSpec {
    SynthKind kind = SynthKind::GaussianBlobs;
    int n_train = 50;
    int n_eval = 100;
    int dim = 5;
    // distance between class means in units of the per-class noise scale
    double separation = 2.0;
    // fraction of training labels flipped (eval labels stay clean)
    double label_noise = 0.0;
    // re-standardize features with train statistics after generation
    bool standardize = false;
    std::string name = "synthetic";
};

// Two-class synthetic generators standing in for the reduced-size benchmark
// datasets; label balance is within one point of 50/50.
Dataset synth_dataset(const SynthSpec& spec, const SeedTree& seeds);

// Writes the dataset back out as a numeric CSV (features f0..f{d-1}, column
// "label"); train rows first, then eval rows.
void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace shapval
