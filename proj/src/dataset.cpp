#include "shapval/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "shapval/coalition.hpp"
#include "shapval/errors.hpp"

namespace shapval {

namespace {

void hash_doubles(std::uint64_t& h, const std::vector<double>& values) {
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h = detail::mix64(h ^ bits);
    }
}

void hash_ints(std::uint64_t& h, const std::vector<int>& values) {
    for (int v : values) h = detail::mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
}

std::vector<int> class_counts(const std::vector<int>& labels, int n_classes) {
    std::vector<int> counts(n_classes, 0);
    for (int y : labels) ++counts[y];
    return counts;
}

// standardize both splits in place using train-split statistics only
void standardize_with_train_stats(Dataset& data) {
    const int d = data.dim;
    const int n = data.train_count();
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (int i = 0; i < n; ++i) {
        auto row = data.train_row(i);
        for (int j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (int j = 0; j < d; ++j) mean[j] /= n;
    for (int i = 0; i < n; ++i) {
        auto row = data.train_row(i);
        for (int j = 0; j < d; ++j) {
            const double c = row[j] - mean[j];
            var[j] += c * c;
        }
    }
    std::vector<double> scale(d);
    for (int j = 0; j < d; ++j) {
        var[j] /= n;
        scale[j] = 1.0 / std::sqrt(std::max(var[j], 1e-12));
    }
    auto apply = [&](std::vector<double>& x, int rows) {
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < d; ++j) {
                double& cell = x[static_cast<std::size_t>(i) * d + j];
                cell = (cell - mean[j]) * scale[j];
            }
        }
    };
    apply(data.train_x, n);
    apply(data.eval_x, data.eval_count());
}

}  // namespace

void Dataset::validate() const {
    if (dim < 1) throw_data("bad-shape", "dataset has no feature columns");
    if (train_count() < 2) throw_data("bad-shape", "need at least 2 training rows");
    if (eval_count() < 1) throw_data("bad-shape", "need at least 1 evaluation row");
    if (train_x.size() != static_cast<std::size_t>(train_count()) * dim ||
        eval_x.size() != static_cast<std::size_t>(eval_count()) * dim) {
        throw_data("bad-shape", "feature matrix size does not match row count * dim");
    }
    if (n_classes < 2) throw_data("degenerate-data", "need at least 2 classes");
    auto check_labels = [&](const std::vector<int>& ys, const char* which) {
        for (int y : ys) {
            if (y < 0 || y >= n_classes) {
                throw_data("bad-label", std::string(which) + " label outside [0, n_classes)");
            }
        }
    };
    check_labels(train_y, "train");
    check_labels(eval_y, "eval");
    for (double v : train_x) {
        if (!std::isfinite(v)) throw_data("bad-value", "non-finite training feature");
    }
    for (double v : eval_x) {
        if (!std::isfinite(v)) throw_data("bad-value", "non-finite evaluation feature");
    }
}

std::uint64_t Dataset::content_hash() const {
    std::uint64_t h = 0x5851f42d4c957f2dULL;
    h = detail::mix64(h ^ static_cast<std::uint64_t>(dim));
    h = detail::mix64(h ^ static_cast<std::uint64_t>(n_classes));
    h = detail::mix64(h ^ static_cast<std::uint64_t>(train_count()));
    h = detail::mix64(h ^ static_cast<std::uint64_t>(eval_count()));
    hash_doubles(h, train_x);
    hash_ints(h, train_y);
    hash_doubles(h, eval_x);
    hash_ints(h, eval_y);
    return h;
}

std::string Dataset::summary_json() const {
    const auto train_counts = class_counts(train_y, n_classes);
    const auto eval_counts = class_counts(eval_y, n_classes);
    std::ostringstream out;
    out << "{\"name\":\"" << name << "\",\"dim\":" << dim << ",\"n_classes\":" << n_classes
        << ",\"n_train\":" << train_count() << ",\"n_eval\":" << eval_count()
        << ",\"train_class_counts\":[";
    for (std::size_t i = 0; i < train_counts.size(); ++i) {
        if (i) out << ',';
        out << train_counts[i];
    }
    out << "],\"eval_class_counts\":[";
    for (std::size_t i = 0; i < eval_counts.size(); ++i) {
        if (i) out << ',';
        out << eval_counts[i];
    }
    out << "]}";
    return out.str();
}

Dataset load_csv(const std::string& path, const std::string& label_column, double eval_fraction,
                 const SeedTree& seeds) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        throw_config("invalid-eval-fraction", "eval_fraction must lie in (0, 1)");
    }
    std::ifstream in(path);
    if (!in) throw_data("file-not-found", "cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw_data("parse", path + ": empty file");

    auto split = [](const std::string& text) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(text);
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t')) cell.pop_back();
            std::size_t start = 0;
            while (start < cell.size() && (cell[start] == ' ' || cell[start] == '\t')) ++start;
            cells.push_back(cell.substr(start));
        }
        return cells;
    };

    const std::vector<std::string> header = split(line);
    if (header.size() < 2) throw_data("parse", path + ": need a label column and at least one feature");
    int label_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == label_column) label_col = static_cast<int>(j);
    }
    if (label_col < 0) throw_data("parse", path + ": no column named '" + label_column + "'");

    const int d = static_cast<int>(header.size()) - 1;
    std::vector<double> rows;       // row-major features
    std::vector<double> raw_labels; // label cell per row
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split(line);
        if (cells.size() != header.size()) {
            throw_data("parse", path + ": row " + std::to_string(line_no) + " has " +
                                    std::to_string(cells.size()) + " cells, expected " +
                                    std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v = 0.0;
            const char* first = cells[j].data();
            const char* last = first + cells[j].size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
                throw_data("parse", path + ": non-numeric cell at row " + std::to_string(line_no) +
                                        ", column " + std::to_string(j + 1) + " ('" + cells[j] + "')");
            }
            if (static_cast<int>(j) == label_col) {
                raw_labels.push_back(v);
            } else {
                rows.push_back(v);
            }
        }
    }

    const int n = static_cast<int>(raw_labels.size());
    if (n < 3) throw_data("bad-shape", path + ": need at least 3 data rows");

    // map distinct integral label values onto a dense 0..K-1 range
    std::map<long long, int> label_ids;
    for (double v : raw_labels) {
        const double rounded = std::nearbyint(v);
        if (std::abs(v - rounded) > 1e-9) {
            throw_data("bad-label", path + ": label value " + std::to_string(v) + " is not an integer");
        }
        label_ids.emplace(static_cast<long long>(rounded), 0);
    }
    int next_id = 0;
    for (auto& [value, id] : label_ids) id = next_id++;
    if (next_id < 2) throw_data("degenerate-data", path + ": only one label value present");

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng = seeds.child("csv-split").rng();
    shuffle(order, rng);

    int n_eval = static_cast<int>(std::lround(eval_fraction * n));
    n_eval = std::clamp(n_eval, 1, n - 2);
    const int n_train = n - n_eval;

    Dataset data;
    data.name = path;
    data.dim = d;
    data.n_classes = next_id;
    data.train_x.reserve(static_cast<std::size_t>(n_train) * d);
    data.eval_x.reserve(static_cast<std::size_t>(n_eval) * d);
    for (int pos = 0; pos < n; ++pos) {
        const int row = order[pos];
        const double* src = rows.data() + static_cast<std::size_t>(row) * d;
        const int label = label_ids.at(static_cast<long long>(std::nearbyint(raw_labels[row])));
        if (pos < n_train) {
            data.train_x.insert(data.train_x.end(), src, src + d);
            data.train_y.push_back(label);
        } else {
            data.eval_x.insert(data.eval_x.end(), src, src + d);
            data.eval_y.push_back(label);
        }
    }

    const auto counts = class_counts(data.train_y, data.n_classes);
    const int present = static_cast<int>(std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }));
    if (present < 2) throw_data("degenerate-data", path + ": training split contains a single class");

    standardize_with_train_stats(data);
    data.validate();
    return data;
}

namespace {

void fill_blob_row(double* row, int d, int label, double separation, Rng& rng) {
    const double offset = 0.5 * separation / std::sqrt(static_cast<double>(d));
    const double sign = label == 1 ? 1.0 : -1.0;
    for (int j = 0; j < d; ++j) row[j] = sign * offset + rng.next_gaussian();
}

void fill_image_row(double* row, int side, int label, double separation, Rng& rng) {
    const int d = side * side;
    for (int j = 0; j < d; ++j) row[j] = rng.next_gaussian();
    const int mid = side / 2;
    // class 0 brightens the middle row, class 1 the middle column
    for (int j = 0; j < side; ++j) {
        if (label == 0) {
            row[mid * side + j] += separation;
        } else {
            row[j * side + mid] += separation;
        }
    }
}

}  // namespace

Dataset synth_dataset(const SynthSpec& spec, const SeedTree& seeds) {
    if (spec.n_train < 2) throw_config("invalid-size", "n_train must be >= 2");
    if (spec.n_eval < 1) throw_config("invalid-size", "n_eval must be >= 1");
    if (spec.dim < 1) throw_config("invalid-dim", "dim must be >= 1");
    if (spec.label_noise < 0.0 || spec.label_noise > 0.5) {
        throw_config("invalid-noise", "label_noise must lie in [0, 0.5]");
    }
    int side = 0;
    if (spec.kind == SynthKind::TwoClassImages) {
        side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.dim))));
        if (side < 2 || side * side != spec.dim) {
            throw_config("invalid-dim", "two-class-images needs dim to be a perfect square >= 4");
        }
    }

    Dataset data;
    data.name = spec.name;
    data.dim = spec.dim;
    data.n_classes = 2;
    data.train_x.resize(static_cast<std::size_t>(spec.n_train) * spec.dim);
    data.eval_x.resize(static_cast<std::size_t>(spec.n_eval) * spec.dim);
    data.train_y.resize(spec.n_train);
    data.eval_y.resize(spec.n_eval);

    auto fill_split = [&](std::vector<double>& x, std::vector<int>& y, int count, const char* label) {
        SeedTree node = seeds.child(label);
        for (int i = 0; i < count; ++i) {
            y[i] = i % 2;  // alternating labels keep the balance within one point
            Rng rng = node.child("row", static_cast<std::uint64_t>(i)).rng();
            double* row = x.data() + static_cast<std::size_t>(i) * spec.dim;
            if (spec.kind == SynthKind::GaussianBlobs) {
                fill_blob_row(row, spec.dim, y[i], spec.separation, rng);
            } else {
                fill_image_row(row, side, y[i], spec.separation, rng);
            }
        }
    };
    fill_split(data.train_x, data.train_y, spec.n_train, "train");
    fill_split(data.eval_x, data.eval_y, spec.n_eval, "eval");

    if (spec.label_noise > 0.0) {
        const int flips = static_cast<int>(std::lround(spec.label_noise * spec.n_train));
        std::vector<int> order(spec.n_train);
        for (int i = 0; i < spec.n_train; ++i) order[i] = i;
        Rng rng = seeds.child("label-noise").rng();
        shuffle(order, rng);
        for (int i = 0; i < flips; ++i) data.train_y[order[i]] ^= 1;
    }

    if (spec.standardize) standardize_with_train_stats(data);
    data.validate();
    return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_data("write-failed", "cannot write " + path);
    for (int j = 0; j < data.dim; ++j) out << 'f' << j << ',';
    out << "label\n";
    char buf[64];
    auto write_row = [&](std::span<const double> row, int label) {
        for (double v : row) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ',';
        }
        out << label << '\n';
    };
    for (int i = 0; i < data.train_count(); ++i) write_row(data.train_row(i), data.train_y[i]);
    for (int i = 0; i < data.eval_count(); ++i) write_row(data.eval_row(i), data.eval_y[i]);
    if (!out) throw_data("write-failed", "failed writing " + path);
}

}  // namespace shapval
