#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqsvm {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FeatureRange {
    double min = 0.0;
    double max = 1.0;
};

// Row-major sample matrix with dense class ids in [0, n_classes).
struct Dataset {
    std::size_t n_features = 0;
    int n_classes = 0;
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;  // class id -> original label text
    std::vector<FeatureRange> normalization;  // empty until normalized

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    std::span<const double> row(std::size_t i) const
    {
        return {features.data() + i * n_features, n_features};
    }

    void push_back(std::span<const double> x, int label);

    std::vector<std::size_t> class_counts() const;

    // Throws DataError on any broken invariant (non-finite values, label range,
    // shape mismatch, normalized values outside [0,1]).
    void validate() const;

    // Copy of the samples at the given indices; metadata carried over.
    Dataset subset(std::span<const std::size_t> indices) const;
};

// Reads a comma-separated table with a header row. Every column except
// label_column must be numeric; label values are categorical and re-indexed
// densely in sorted order (numeric order when all labels parse as numbers).
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);

// Writes a dataset back as CSV with a trailing "label" column (class ids).
// Doubles use shortest round-trip form, so load_csv reproduces the values.
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column = "label");

// Reads a file produced by write_csv: the label column already holds class ids
// in [0, n_classes), so ids survive even when some class is absent.
Dataset load_indexed_csv(const std::filesystem::path& path, const std::string& label_column,
                         int n_classes);

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool normalize = true;  // fit min-max ranges on train, apply to both
};

struct SplitResult {
    Dataset train;
    Dataset test;
    bool stratified = false;  // true when the plain shuffle emptied a class
};

// Seeded shuffle split. Min/max normalization is fitted on the train part and
// applied to both; test values are clamped to [0,1].
SplitResult split(const Dataset& ds, const SplitSpec& spec);

// Applies ranges (fitted elsewhere) in place, clamping into [0,1].
void apply_normalization(Dataset& ds, std::span<const FeatureRange> ranges);
std::vector<FeatureRange> fit_normalization(const Dataset& ds);

std::string format_double(double v);

}  // namespace seqsvm
