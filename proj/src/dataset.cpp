#include "seqsvm/dataset.hpp"

#include "seqsvm/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace seqsvm {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_double(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

RawTable read_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open dataset '" + path.string() + "'");
    RawTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        auto fields = split_fields(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(line_no);
    }
    if (t.header.empty())
        throw DataError("dataset '" + path.string() + "' is empty");
    return t;
}

}  // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void Dataset::push_back(std::span<const double> x, int label)
{
    if (x.size() != n_features)
        throw DataError("sample width mismatch");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

std::vector<std::size_t> Dataset::class_counts() const
{
    std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(n_classes, 0)), 0);
    for (int y : labels)
        ++counts.at(static_cast<std::size_t>(y));
    return counts;
}

void Dataset::validate() const
{
    if (n_features < 1)
        throw DataError("dataset needs at least one feature");
    if (n_classes < 2)
        throw DataError("dataset needs at least two classes");
    if (features.size() != labels.size() * n_features)
        throw DataError("feature matrix shape does not match label count");
    for (int y : labels)
        if (y < 0 || y >= n_classes)
            throw DataError("label out of range");
    for (double v : features)
        if (!std::isfinite(v))
            throw DataError("non-finite feature value");
    if (!normalization.empty()) {
        if (normalization.size() != n_features)
            throw DataError("normalization size mismatch");
        for (double v : features)
            if (v < 0.0 || v > 1.0)
                throw DataError("normalized feature outside [0,1]");
    }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const
{
    Dataset out;
    out.n_features = n_features;
    out.n_classes = n_classes;
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.normalization = normalization;
    out.features.reserve(indices.size() * n_features);
    out.labels.reserve(indices.size());
    for (auto i : indices)
        out.push_back(row(i), labels.at(i));
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column)
{
    RawTable t = read_table(path);
    const auto it = std::find(t.header.begin(), t.header.end(), label_column);
    if (it == t.header.end())
        throw DataError("label column '" + label_column + "' not found in " + path.string());
    const auto label_idx = static_cast<std::size_t>(it - t.header.begin());
    if (t.header.size() < 2)
        throw DataError("dataset has no feature columns");

    Dataset ds;
    ds.n_features = t.header.size() - 1;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (c != label_idx)
            ds.feature_names.push_back(t.header[c]);

    // Dense class ids in sorted label order.
    std::vector<std::string> raw_labels;
    raw_labels.reserve(t.rows.size());
    bool all_numeric = true;
    for (const auto& r : t.rows) {
        raw_labels.push_back(r[label_idx]);
        all_numeric = all_numeric && parse_double(r[label_idx]).has_value();
    }
    std::vector<std::string> names = raw_labels;
    std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
        if (all_numeric)
            return *parse_double(a) < *parse_double(b);
        return a < b;
    });
    names.erase(std::unique(names.begin(), names.end(),
                            [&](const std::string& a, const std::string& b) {
                                return all_numeric ? *parse_double(a) == *parse_double(b) : a == b;
                            }),
                names.end());
    if (names.size() < 2)
        throw DataError("dataset '" + path.string() + "' contains a single class");
    std::map<std::string, int> id_of;
    for (std::size_t i = 0; i < names.size(); ++i)
        id_of[names[i]] = static_cast<int>(i);
    ds.class_names = names;
    ds.n_classes = static_cast<int>(names.size());

    std::vector<double> x(ds.n_features);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t k = 0;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (c == label_idx)
                continue;
            const auto v = parse_double(t.rows[r][c]);
            if (!v || !std::isfinite(*v))
                throw DataError(path.string() + ":" + std::to_string(t.line_numbers[r]) +
                                ": non-numeric feature '" + t.rows[r][c] + "' in column '" +
                                t.header[c] + "'");
            x[k++] = *v;
        }
        int label = 0;
        if (all_numeric) {
            // map via the canonical spelling that compared equal
            const double lv = *parse_double(raw_labels[r]);
            for (std::size_t i = 0; i < names.size(); ++i)
                if (*parse_double(names[i]) == lv)
                    label = static_cast<int>(i);
        } else {
            label = id_of.at(raw_labels[r]);
        }
        ds.push_back(x, label);
    }
    ds.validate();
    return ds;
}

Dataset load_indexed_csv(const std::filesystem::path& path, const std::string& label_column,
                         int n_classes)
{
    RawTable t = read_table(path);
    const auto it = std::find(t.header.begin(), t.header.end(), label_column);
    if (it == t.header.end())
        throw DataError("label column '" + label_column + "' not found in " + path.string());
    const auto label_idx = static_cast<std::size_t>(it - t.header.begin());

    Dataset ds;
    ds.n_features = t.header.size() - 1;
    ds.n_classes = n_classes;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (c != label_idx)
            ds.feature_names.push_back(t.header[c]);
    for (int k = 0; k < n_classes; ++k)
        ds.class_names.push_back(std::to_string(k));

    std::vector<double> x(ds.n_features);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t k = 0;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            const auto v = parse_double(t.rows[r][c]);
            if (!v || !std::isfinite(*v))
                throw DataError(path.string() + ":" + std::to_string(t.line_numbers[r]) +
                                ": non-numeric field '" + t.rows[r][c] + "'");
            if (c == label_idx) {
                const auto id = static_cast<int>(*v);
                if (id != *v || id < 0 || id >= n_classes)
                    throw DataError(path.string() + ":" + std::to_string(t.line_numbers[r]) +
                                    ": class id out of range");
                continue;
            }
            x[k++] = *v;
        }
        ds.push_back(x, static_cast<int>(*parse_double(t.rows[r][label_idx])));
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& label_column)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write '" + path.string() + "'");
    for (std::size_t j = 0; j < ds.n_features; ++j) {
        const std::string name =
            j < ds.feature_names.size() ? ds.feature_names[j] : "f" + std::to_string(j);
        out << name << ',';
    }
    out << label_column << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.row(i))
            out << format_double(v) << ',';
        out << ds.labels[i] << '\n';
    }
}

std::vector<FeatureRange> fit_normalization(const Dataset& ds)
{
    if (ds.empty())
        throw DataError("cannot fit normalization on an empty dataset");
    std::vector<FeatureRange> ranges(ds.n_features);
    for (std::size_t j = 0; j < ds.n_features; ++j) {
        ranges[j].min = ranges[j].max = ds.row(0)[j];
    }
    for (std::size_t i = 1; i < ds.size(); ++i) {
        const auto x = ds.row(i);
        for (std::size_t j = 0; j < ds.n_features; ++j) {
            ranges[j].min = std::min(ranges[j].min, x[j]);
            ranges[j].max = std::max(ranges[j].max, x[j]);
        }
    }
    return ranges;
}

void apply_normalization(Dataset& ds, std::span<const FeatureRange> ranges)
{
    if (ranges.size() != ds.n_features)
        throw DataError("normalization size mismatch");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.n_features; ++j) {
            double& v = ds.features[i * ds.n_features + j];
            const double span = ranges[j].max - ranges[j].min;
            // constant features collapse to 0
            v = span > 0.0 ? (v - ranges[j].min) / span : 0.0;
            v = std::clamp(v, 0.0, 1.0);
        }
    }
    ds.normalization.assign(ranges.begin(), ranges.end());
}

SplitResult split(const Dataset& ds, const SplitSpec& spec)
{
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw DataError("train fraction must lie strictly between 0 and 1");
    if (ds.size() < 2)
        throw DataError("need at least two samples to split");

    const std::size_t n = ds.size();
    auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    Rng rng(spec.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    std::vector<bool> seen(static_cast<std::size_t>(ds.n_classes), false);
    for (auto i : train_idx)
        seen[static_cast<std::size_t>(ds.labels[i])] = true;
    const bool class_missing = std::find(seen.begin(), seen.end(), false) != seen.end();

    SplitResult result;
    if (class_missing) {
        // Stratified fallback: per-class quota, at least one training sample each.
        result.stratified = true;
        train_idx.clear();
        test_idx.clear();
        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.n_classes));
        for (auto i : order)
            by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
        for (const auto& members : by_class) {
            if (members.empty())
                throw DataError("class without samples cannot be split");
            auto quota = static_cast<std::size_t>(
                std::llround(spec.train_fraction * static_cast<double>(members.size())));
            quota = std::clamp<std::size_t>(quota, 1, members.size());
            train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota));
            test_idx.insert(test_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(quota), members.end());
        }
        if (test_idx.empty())
            throw DataError("stratified split left the test set empty");
        std::vector<std::size_t> pos(n);
        for (std::size_t k = 0; k < n; ++k)
            pos[order[k]] = k;
        const auto by_shuffle = [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; };
        std::sort(train_idx.begin(), train_idx.end(), by_shuffle);
        std::sort(test_idx.begin(), test_idx.end(), by_shuffle);
    }

    result.train = ds.subset(train_idx);
    result.test = ds.subset(test_idx);
    if (spec.normalize) {
        const auto ranges = fit_normalization(result.train);
        apply_normalization(result.train, ranges);
        apply_normalization(result.test, ranges);
    }
    return result;
}

}  // namespace seqsvm
