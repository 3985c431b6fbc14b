#include "taggraph/index.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "taggraph/util.hpp"

namespace taggraph {

using nlohmann::json;

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw std::runtime_error("cosine: dimension mismatch");
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::runtime_error("cosine: zero vector");
    return a.dot(b) / (na * nb);
}

void VectorIndex::upsert(const KnowledgeEntry& entry) {
    if (entry.id.empty()) throw std::runtime_error("index entry needs an id");
    if (entry.summary.empty()) throw std::runtime_error("index entry needs a summary");
    if (meta_.dim > 0 && entry.vector.size() != meta_.dim) {
        throw std::runtime_error("index dimension mismatch: expected " +
                                 std::to_string(meta_.dim) + ", got " +
                                 std::to_string(entry.vector.size()));
    }
    EmbeddingVector v = normalized(entry.vector);
    if (meta_.dim == 0) meta_.dim = static_cast<int>(v.size());

    auto it = row_of_.find(entry.id);
    if (it != row_of_.end()) {
        summaries_[it->second] = entry.summary;
        vectors_.row(static_cast<Eigen::Index>(it->second)) = v.transpose();
        return;
    }

    // Keep rows in ascending id order; desk-scale indexes make the shift cheap.
    std::size_t pos = static_cast<std::size_t>(
        std::lower_bound(ids_.begin(), ids_.end(), entry.id) - ids_.begin());
    ids_.insert(ids_.begin() + static_cast<std::ptrdiff_t>(pos), entry.id);
    summaries_.insert(summaries_.begin() + static_cast<std::ptrdiff_t>(pos), entry.summary);

    Eigen::MatrixXd next(static_cast<Eigen::Index>(ids_.size()), meta_.dim);
    const Eigen::Index p = static_cast<Eigen::Index>(pos);
    if (p > 0) next.topRows(p) = vectors_.topRows(p);
    next.row(p) = v.transpose();
    if (vectors_.rows() > p) next.bottomRows(vectors_.rows() - p) = vectors_.bottomRows(vectors_.rows() - p);
    vectors_ = std::move(next);

    row_of_.clear();
    for (std::size_t i = 0; i < ids_.size(); ++i) row_of_[ids_[i]] = i;
}

std::optional<KnowledgeEntry> VectorIndex::get(const std::string& id) const {
    auto it = row_of_.find(id);
    if (it == row_of_.end()) return std::nullopt;
    KnowledgeEntry e;
    e.id = id;
    e.summary = summaries_[it->second];
    e.vector = vectors_.row(static_cast<Eigen::Index>(it->second)).transpose();
    return e;
}

std::vector<std::pair<std::string, double>> VectorIndex::top_k(const EmbeddingVector& query,
                                                               std::size_t k) const {
    if (k < 1) throw std::runtime_error("top_k: k must be >= 1");
    if (ids_.empty()) return {};
    if (query.size() != meta_.dim) throw std::runtime_error("top_k: query dimension mismatch");

    // Sequential accumulation keeps scores bit-reproducible (and equal to a
    // plain-loop oracle); SIMD reductions may associate differently.
    double qs = 0.0;
    for (int d = 0; d < meta_.dim; ++d) qs += query[d] * query[d];
    if (qs == 0.0) throw std::runtime_error("top_k: zero query vector");
    const double qnorm = std::sqrt(qs);

    Eigen::VectorXd scores(static_cast<Eigen::Index>(ids_.size()));
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        double dot = 0.0;
        for (int d = 0; d < meta_.dim; ++d) {
            dot += vectors_(static_cast<Eigen::Index>(i), d) * (query[d] / qnorm);
        }
        scores[static_cast<Eigen::Index>(i)] = dot;
    }

    std::vector<std::size_t> order(ids_.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t take = std::min(k, order.size());
    auto better = [&](std::size_t a, std::size_t b) {
        double sa = scores[static_cast<Eigen::Index>(a)];
        double sb = scores[static_cast<Eigen::Index>(b)];
        if (sa != sb) return sa > sb;
        return ids_[a] < ids_[b];  // rows are id-ascending, but keep it explicit
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);

    std::vector<std::pair<std::string, double>> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.emplace_back(ids_[order[i]], scores[static_cast<Eigen::Index>(order[i])]);
    }
    return out;
}

std::string VectorIndex::to_json() const {
    json j;
    j["meta"] = {{"dim", meta_.dim},
                 {"tokenizer", meta_.tokenizer},
                 {"delimiters",
                  {{"tuple", meta_.delimiters.tuple},
                   {"record", meta_.delimiters.record},
                   {"completion", meta_.delimiters.completion},
                   {"explanation", meta_.delimiters.explanation},
                   {"inference", meta_.delimiters.inference}}},
                 {"created_at_unix", meta_.created_at_unix},
                 {"entry_count", ids_.size()}};
    j["entries"] = json::array();
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        std::vector<double> vec(static_cast<std::size_t>(meta_.dim));
        for (int d = 0; d < meta_.dim; ++d) {
            vec[static_cast<std::size_t>(d)] = vectors_(static_cast<Eigen::Index>(i), d);
        }
        j["entries"].push_back({{"id", ids_[i]}, {"summary", summaries_[i]}, {"vector", vec}});
    }
    return j.dump(2) + "\n";
}

VectorIndex VectorIndex::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("index file is not valid JSON: ") + e.what());
    }
    if (!j.contains("meta") || !j.contains("entries")) {
        throw std::runtime_error("index file missing meta/entries");
    }
    IndexMeta meta;
    const auto& m = j.at("meta");
    meta.dim = m.at("dim").get<int>();
    if (meta.dim < 1) throw std::runtime_error("index meta has invalid dimension");
    meta.tokenizer = m.at("tokenizer").get<std::string>();
    const auto& d = m.at("delimiters");
    meta.delimiters.tuple = d.at("tuple").get<std::string>();
    meta.delimiters.record = d.at("record").get<std::string>();
    meta.delimiters.completion = d.at("completion").get<std::string>();
    meta.delimiters.explanation = d.at("explanation").get<std::string>();
    meta.delimiters.inference = d.at("inference").get<std::string>();
    meta.created_at_unix = m.at("created_at_unix").get<std::int64_t>();

    VectorIndex idx(meta);
    const auto& entries = j.at("entries");
    idx.vectors_.resize(static_cast<Eigen::Index>(entries.size()), meta.dim);
    // Stored vectors were normalized at insert time; re-normalizing here
    // would perturb low bits and break exact save/load score round trips.
    for (const auto& e : entries) {
        const auto& vec = e.at("vector");
        if (static_cast<int>(vec.size()) != meta.dim) {
            throw std::runtime_error("entry '" + e.at("id").get<std::string>() +
                                     "' has dimension " + std::to_string(vec.size()) +
                                     ", index dimension is " + std::to_string(meta.dim));
        }
        std::string id = e.at("id").get<std::string>();
        if (idx.row_of_.count(id)) throw std::runtime_error("duplicate entry id: " + id);
        std::size_t row = idx.ids_.size();
        idx.ids_.push_back(id);
        idx.summaries_.push_back(e.at("summary").get<std::string>());
        idx.row_of_[id] = row;
        for (int k = 0; k < meta.dim; ++k) {
            idx.vectors_(static_cast<Eigen::Index>(row), k) =
                vec[static_cast<std::size_t>(k)].get<double>();
        }
    }
    for (std::size_t i = 1; i < idx.ids_.size(); ++i) {
        if (idx.ids_[i - 1] >= idx.ids_[i]) {
            throw std::runtime_error("index entries not sorted by id");
        }
    }
    return idx;
}

void VectorIndex::save(const std::string& path) const {
    atomic_write_file(path, to_json());
}

VectorIndex VectorIndex::load(const std::string& path) {
    return from_json(read_text_file(path));
}

}  // namespace taggraph
