#include "seqsvm/trainer.hpp"

#include "seqsvm/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace seqsvm {

std::string to_string(Multiclass kind)
{
    return kind == Multiclass::OneVsOne ? "ovo" : "ova";
}

Multiclass multiclass_from_string(const std::string& s)
{
    if (s == "ovo")
        return Multiclass::OneVsOne;
    if (s == "ova")
        return Multiclass::OneVsAll;
    throw std::invalid_argument("unknown multiclass kind '" + s + "'");
}

double FloatVector::decision(std::span<const double> x) const
{
    double s = bias;
    for (std::size_t i = 0; i < weights.size(); ++i)
        s += weights[i] * x[i];
    return s;
}

int FloatSvmModel::predict(std::span<const double> x) const
{
    if (kind == Multiclass::OneVsAll) {
        int best = 0;
        double best_score = vectors.at(0).decision(x);
        for (std::size_t k = 1; k < vectors.size(); ++k) {
            const double s = vectors[k].decision(x);
            if (s > best_score) {
                best_score = s;
                best = static_cast<int>(k);
            }
        }
        return vectors[static_cast<std::size_t>(best)].class_a;
    }
    std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
    for (const auto& v : vectors)
        ++votes[static_cast<std::size_t>(v.decision(x) >= 0.0 ? v.class_a : v.class_b)];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

void FloatSvmModel::validate() const
{
    if (n_classes < 2 || n_features < 1)
        throw TrainError("model needs n_classes >= 2 and n_features >= 1");
    const auto expected = kind == Multiclass::OneVsOne
                              ? static_cast<std::size_t>(pair_count(n_classes))
                              : static_cast<std::size_t>(n_classes);
    if (vectors.size() != expected)
        throw TrainError("model has " + std::to_string(vectors.size()) + " vectors, expected " +
                         std::to_string(expected));
    for (const auto& v : vectors)
        if (v.weights.size() != n_features)
            throw TrainError("vector width does not match n_features");
}

BinaryResult train_binary(const Dataset& ds, int class_a, int class_b, const Hyper& hyper)
{
    if (!(hyper.lambda > 0.0) || hyper.epochs < 1)
        throw TrainError("lambda must be > 0 and epochs >= 1");

    const std::size_t m = ds.n_features;
    std::vector<std::size_t> idx;
    std::vector<double> target;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int y = ds.labels[i];
        if (y == class_a) {
            idx.push_back(i);
            target.push_back(1.0);
            ++n_pos;
        } else if (class_b == kRestClass || y == class_b) {
            idx.push_back(i);
            target.push_back(-1.0);
        }
    }
    const std::size_t n_neg = idx.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw TrainError("pair (" + std::to_string(class_a) + ", " + std::to_string(class_b) +
                         ") needs samples of both classes");

    BinaryResult out;
    out.weights.assign(m, 0.0);

    const auto first = ds.row(idx[0]);
    const bool all_same = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) {
        const auto r = ds.row(i);
        return std::equal(r.begin(), r.end(), first.begin());
    });
    if (all_same) {
        out.degenerate = true;
        out.bias = n_pos >= n_neg ? 1.0 : -1.0;
        out.train_accuracy = static_cast<double>(std::max(n_pos, n_neg)) / static_cast<double>(idx.size());
        return out;
    }

    // w[m] is the bias coordinate.
    std::vector<double> w(m + 1, 0.0);
    std::vector<double> avg(m + 1, 0.0);
    const double lambda = hyper.lambda;
    const double radius2 = 1.0 / lambda;
    const std::uint64_t total = static_cast<std::uint64_t>(hyper.epochs) * idx.size();
    const std::uint64_t avg_from = total / 2 + 1;
    std::uint64_t averaged = 0;

    Rng rng(hyper.seed);
    std::vector<std::size_t> order(idx.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        order[k] = k;

    std::uint64_t t = 0;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t k : order) {
            ++t;
            const auto x = ds.row(idx[k]);
            const double y = target[k];
            double margin = w[m];
            for (std::size_t j = 0; j < m; ++j)
                margin += w[j] * x[j];
            margin *= y;

            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double shrink = 1.0 - eta * lambda;
            for (double& wj : w)
                wj *= shrink;
            if (margin < 1.0) {
                for (std::size_t j = 0; j < m; ++j)
                    w[j] += eta * y * x[j];
                w[m] += eta * y;
            }
            double norm2 = 0.0;
            for (double wj : w)
                norm2 += wj * wj;
            if (norm2 > radius2) {
                const double s = std::sqrt(radius2 / norm2);
                for (double& wj : w)
                    wj *= s;
            }
            if (t >= avg_from) {
                for (std::size_t j = 0; j <= m; ++j)
                    avg[j] += w[j];
                ++averaged;
            }
        }
    }
    for (std::size_t j = 0; j < m; ++j)
        out.weights[j] = avg[j] / static_cast<double>(averaged);
    out.bias = avg[m] / static_cast<double>(averaged);

    std::size_t correct = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        double s = out.bias;
        const auto x = ds.row(idx[k]);
        for (std::size_t j = 0; j < m; ++j)
            s += out.weights[j] * x[j];
        correct += (s >= 0.0) == (target[k] > 0.0);
    }
    out.train_accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
    return out;
}

namespace {

// Runs job(k) for k in [0, count) on up to `threads` workers. The first
// exception (lowest k) is rethrown after all workers finish.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k)
            job(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    job(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

struct PairJob {
    int a;
    int b;
};

FloatSvmModel train_all(const Dataset& train, const Hyper& hyper, unsigned threads,
                        Multiclass kind)
{
    train.validate();
    std::vector<PairJob> jobs;
    if (kind == Multiclass::OneVsOne) {
        for (int a = 0; a < train.n_classes; ++a)
            for (int b = a + 1; b < train.n_classes; ++b)
                jobs.push_back({a, b});
    } else {
        for (int a = 0; a < train.n_classes; ++a)
            jobs.push_back({a, kRestClass});
    }

    FloatSvmModel model;
    model.kind = kind;
    model.n_classes = train.n_classes;
    model.n_features = train.n_features;
    model.vectors.resize(jobs.size());

    parallel_for(jobs.size(), threads, [&](std::size_t k) {
        Hyper h = hyper;
        // every one-vs-all vector walks the same sample order
        h.seed = derive_seed(hyper.seed, kind == Multiclass::OneVsOne ? k : 0);
        try {
            const auto r = train_binary(train, jobs[k].a, jobs[k].b, h);
            auto& v = model.vectors[k];
            v.class_a = jobs[k].a;
            v.class_b = jobs[k].b;
            v.weights = r.weights;
            v.bias = r.bias;
            v.degenerate = r.degenerate;
            v.train_accuracy = r.train_accuracy;
        } catch (const TrainError& e) {
            throw TrainError("vector " + std::to_string(k) + " (" + std::to_string(jobs[k].a) +
                             " vs " +
                             (jobs[k].b == kRestClass ? std::string("rest") : std::to_string(jobs[k].b)) +
                             "): " + e.what());
        }
    });
    return model;
}

}  // namespace

FloatSvmModel train_ovo(const Dataset& train, const Hyper& hyper, unsigned threads)
{
    return train_all(train, hyper, threads, Multiclass::OneVsOne);
}

FloatSvmModel train_ova(const Dataset& train, const Hyper& hyper, unsigned threads)
{
    return train_all(train, hyper, threads, Multiclass::OneVsAll);
}

Hyper best_candidate(std::span<const SearchCandidate> candidates)
{
    if (candidates.empty())
        throw TrainError("no search candidates");
    const SearchCandidate* best = &candidates[0];
    for (const auto& c : candidates.subspan(1)) {
        if (c.holdout_accuracy > best->holdout_accuracy) {
            best = &c;
        } else if (c.holdout_accuracy == best->holdout_accuracy) {
            if (c.hyper.lambda < best->hyper.lambda ||
                (c.hyper.lambda == best->hyper.lambda && c.hyper.epochs < best->hyper.epochs))
                best = &c;
        }
    }
    return best->hyper;
}

SearchResult random_search(const Dataset& train, const Dataset& holdout, const SearchSpace& space,
                           int budget, std::uint64_t seed, unsigned threads)
{
    if (budget < 1)
        throw TrainError("search budget must be >= 1");
    if (!(space.lambda_min > 0.0) || space.lambda_max < space.lambda_min ||
        space.epochs_min < 1 || space.epochs_max < space.epochs_min)
        throw TrainError("invalid search space");

    Rng rng(derive_seed(seed, 0x5ea4c4));
    const double log_lo = std::log(space.lambda_min);
    const double log_hi = std::log(space.lambda_max);
    SearchResult result;
    for (int k = 0; k < budget; ++k) {
        SearchCandidate c;
        c.hyper.lambda = std::exp(rng.uniform(log_lo, log_hi));
        c.hyper.epochs = static_cast<int>(rng.integer(space.epochs_min, space.epochs_max));
        // every candidate trains from the same seed so only hyperparameters differ
        c.hyper.seed = seed;
        const auto model = train_ovo(train, c.hyper, threads);
        c.holdout_accuracy = accuracy(model, holdout);
        result.candidates.push_back(c);
    }
    result.best = best_candidate(result.candidates);
    for (const auto& c : result.candidates)
        if (c.hyper == result.best)
            result.best_accuracy = c.holdout_accuracy;
    return result;
}

double accuracy(const Dataset& ds, const std::function<int(std::size_t)>& predict_sample)
{
    if (ds.empty())
        throw DataError("accuracy of an empty dataset is undefined");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        correct += predict_sample(i) == ds.labels[i];
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double accuracy(const FloatSvmModel& model, const Dataset& ds)
{
    if (model.n_features != ds.n_features)
        throw DataError("model and dataset feature counts differ");
    return accuracy(ds, [&](std::size_t i) { return model.predict(ds.row(i)); });
}

}  // namespace seqsvm
