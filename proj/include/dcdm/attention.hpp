// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dcdm/error.hpp"

namespace dcdm {

// Token geometry of a multi-shot sequence: contiguous shots, each a whole
// number of frames.
class ShotLayout {
  public:
    ShotLayout(uint32_t tokens_per_frame, std::vector<uint32_t> shot_lengths)
        : tokens_per_frame_(tokens_per_frame), lengths_(std::move(shot_lengths)) {
        if (tokens_per_frame_ == 0) throw_validation("layout", "tokens_per_frame must be >= 1");
        if (lengths_.empty()) throw_validation("layout", "layout needs at least one shot");
        offsets_.reserve(lengths_.size() + 1);
        offsets_.push_back(0);
        for (uint32_t l : lengths_) {
            if (l < tokens_per_frame_ || l % tokens_per_frame_ != 0) {
                throw_validation("layout", "shot length " + std::to_string(l) +
                                               " is not a positive multiple of tokens_per_frame");
            }
            offsets_.push_back(offsets_.back() + l);
        }
    }

    uint32_t shot_count() const { return uint32_t(lengths_.size()); }
    uint32_t tokens_per_frame() const { return tokens_per_frame_; }
    uint32_t total_tokens() const { return offsets_.back(); }
    uint32_t shot_length(uint32_t i) const { return lengths_[i]; }
    uint32_t shot_begin(uint32_t i) const { return offsets_[i]; }
    uint32_t shot_end(uint32_t i) const { return offsets_[i + 1]; }
    uint32_t shot_of_token(uint32_t tok) const {
        for (uint32_t i = 0; i < shot_count(); ++i) {
            if (tok < offsets_[i + 1]) return i;
        }
        throw_validation("layout", "token index out of range");
    }

  private:
    uint32_t tokens_per_frame_;
    std::vector<uint32_t> lengths_;
    std::vector<uint32_t> offsets_;
};

// How many key/value tokens each shot exposes to the others. The summary is
// the first S tokens of the shot's first frame, in raster order.
struct SummaryPolicy {
    uint32_t summary_tokens = 0;  // S

    void validate(const ShotLayout& layout) const {
        if (summary_tokens > layout.tokens_per_frame()) {
            throw_validation("policy", "summary size " + std::to_string(summary_tokens) +
                                           " exceeds tokens_per_frame " +
                                           std::to_string(layout.tokens_per_frame()));
        }
    }
};

inline std::vector<std::vector<uint32_t>> select_summary(const ShotLayout& layout,
                                                         const SummaryPolicy& policy) {
    policy.validate(layout);
    std::vector<std::vector<uint32_t>> sets(layout.shot_count());
    for (uint32_t i = 0; i < layout.shot_count(); ++i) {
        sets[i].reserve(policy.summary_tokens);
        for (uint32_t s = 0; s < policy.summary_tokens; ++s) {
            sets[i].push_back(layout.shot_begin(i) + s);
        }
    }
    return sets;
}

// heads x rows x dim, row-major, contiguous per head.
template <typename Real>
struct HeadMatrixT {
    uint32_t heads = 0, rows = 0, dim = 0;
    std::vector<Real> data;

    HeadMatrixT() = default;
    HeadMatrixT(uint32_t h, uint32_t r, uint32_t d)
        : heads(h), rows(r), dim(d), data(size_t(h) * r * d, Real(0)) {}

    Real* row(uint32_t h, uint32_t r) {
        return data.data() + (size_t(h) * rows + r) * dim;
    }
    const Real* row(uint32_t h, uint32_t r) const {
        return data.data() + (size_t(h) * rows + r) * dim;
    }
};

using HeadMatrix = HeadMatrixT<float>;

template <typename Real>
struct AttentionInputsT {
    HeadMatrixT<Real> q, k, v;

    void validate() const {
        if (q.heads != k.heads || q.heads != v.heads || q.rows != k.rows || q.rows != v.rows ||
            q.dim != k.dim || q.dim != v.dim) {
            throw_validation("shape", "Q/K/V must share heads, rows and dim");
        }
        if (q.heads == 0 || q.rows == 0 || q.dim == 0) {
            throw_validation("shape", "attention inputs must be non-empty");
        }
    }
};

using AttentionInputs = AttentionInputsT<float>;

// Concatenated summary K/V rows in ascending shot order, with per-shot ranges
// so a shot's own rows can be skipped.
template <typename Real>
struct GlobalCacheT {
    HeadMatrixT<Real> k, v;
    std::vector<uint32_t> shot_row_begin;  // shot i owns rows [begin[i], begin[i+1])
    std::vector<uint32_t> token_ids;       // global token index of each cache row

    uint32_t rows() const { return k.rows; }

    // Cache row indices visible to shot i (everyone else's summaries).
    std::vector<uint32_t> rows_excluding(uint32_t shot) const {
        std::vector<uint32_t> out;
        out.reserve(rows());
        for (uint32_t i = 0; i + 1 < uint32_t(shot_row_begin.size()); ++i) {
            if (i == shot) continue;
            for (uint32_t r = shot_row_begin[i]; r < shot_row_begin[i + 1]; ++r) {
                out.push_back(r);
            }
        }
        return out;
    }
};

using GlobalCache = GlobalCacheT<float>;

template <typename Real>
GlobalCacheT<Real> build_global_cache(const HeadMatrixT<Real>& k, const HeadMatrixT<Real>& v,
                                      const std::vector<std::vector<uint32_t>>& summaries) {
    GlobalCacheT<Real> cache;
    uint32_t total = 0;
    for (const auto& s : summaries) total += uint32_t(s.size());
    cache.k = HeadMatrixT<Real>(k.heads, total, k.dim);
    cache.v = HeadMatrixT<Real>(v.heads, total, v.dim);
    cache.shot_row_begin.reserve(summaries.size() + 1);
    cache.shot_row_begin.push_back(0);
    cache.token_ids.reserve(total);

    uint32_t row = 0;
    for (const auto& s : summaries) {
        for (uint32_t tok : s) {
            if (tok >= k.rows) throw_runtime("internal", "summary token index out of range");
            for (uint32_t h = 0; h < k.heads; ++h) {
                std::copy(k.row(h, tok), k.row(h, tok) + k.dim, cache.k.row(h, row));
                std::copy(v.row(h, tok), v.row(h, tok) + v.dim, cache.v.row(h, row));
            }
            cache.token_ids.push_back(tok);
            ++row;
        }
        cache.shot_row_begin.push_back(row);
    }
    return cache;
}

// Query-may-attend-to-key matrix; the explicit rendering of the sparse
// pattern used by the dense oracle.
struct AttentionMask {
    uint32_t tokens = 0;
    std::vector<uint8_t> allow;  // [q][k]

    bool at(uint32_t q, uint32_t k) const { return allow[size_t(q) * tokens + k] != 0; }
    void set(uint32_t q, uint32_t k, bool v) { allow[size_t(q) * tokens + k] = v ? 1 : 0; }
};

inline AttentionMask build_pattern_mask(const ShotLayout& layout, const SummaryPolicy& policy) {
    policy.validate(layout);
    const uint32_t n = layout.total_tokens();
    AttentionMask mask;
    mask.tokens = n;
    mask.allow.assign(size_t(n) * n, 0);
    const auto summaries = select_summary(layout, policy);
    for (uint32_t i = 0; i < layout.shot_count(); ++i) {
        for (uint32_t q = layout.shot_begin(i); q < layout.shot_end(i); ++q) {
            for (uint32_t k = layout.shot_begin(i); k < layout.shot_end(i); ++k) {
                mask.set(q, k, true);
            }
            for (uint32_t j = 0; j < layout.shot_count(); ++j) {
                if (j == i) continue;
                for (uint32_t tok : summaries[j]) mask.set(q, tok, true);
            }
        }
    }
    return mask;
}

// Counters filled by the instrumented attention path.
struct AttentionStats {
    uint64_t pair_evaluations = 0;  // (query, key) logit evaluations, summed over heads
};

// Softmax probabilities retained for a backward pass: for each shot the
// ordered key-token list, and per (head, query) the probability row.
template <typename Real>
struct SparseAttentionCache {
    std::vector<std::vector<uint32_t>> shot_keys;  // global token ids, cache-then-local order
    std::vector<size_t> row_offset;                // per (head * rows + row)
    std::vector<Real> probs;
};

namespace detail {

// Scaled-dot softmax attention of one query against an explicit key id list.
// Logits are shifted by the row max and normalized by exclusion, never by
// additive masking. Accumulation in double keeps float runs stable.
template <typename Real>
inline void attend_row(const Real* q, const HeadMatrixT<Real>& k, const HeadMatrixT<Real>& v,
                       uint32_t head, const uint32_t* keys, size_t key_count, double scale,
                       Real* out, Real* probs_out) {
    thread_local std::vector<double> logits;
    logits.resize(key_count);
    double maxlog = -std::numeric_limits<double>::infinity();
    const uint32_t dim = k.dim;
    for (size_t j = 0; j < key_count; ++j) {
        const Real* krow = k.row(head, keys[j]);
        double dot = 0.0;
        for (uint32_t c = 0; c < dim; ++c) dot += double(q[c]) * double(krow[c]);
        logits[j] = dot * scale;
        if (logits[j] > maxlog) maxlog = logits[j];
    }
    double denom = 0.0;
    for (size_t j = 0; j < key_count; ++j) {
        logits[j] = std::exp(logits[j] - maxlog);
        denom += logits[j];
    }
    thread_local std::vector<double> acc;
    acc.assign(dim, 0.0);
    for (size_t j = 0; j < key_count; ++j) {
        const double p = logits[j] / denom;
        if (probs_out) probs_out[j] = Real(p);
        const Real* vrow = v.row(head, keys[j]);
        for (uint32_t c = 0; c < dim; ++c) acc[c] += p * double(vrow[c]);
    }
    for (uint32_t c = 0; c < dim; ++c) out[c] = Real(acc[c]);
}

}  // namespace detail

// Sparse inter-shot self-attention: every query sees its whole shot plus the
// other shots' summary rows. Output rows keep their original token positions.
template <typename Real>
HeadMatrixT<Real> sparse_shot_attention(const AttentionInputsT<Real>& inputs,
                                        const ShotLayout& layout, const SummaryPolicy& policy,
                                        AttentionStats* stats = nullptr,
                                        SparseAttentionCache<Real>* cache = nullptr) {
    inputs.validate();
    policy.validate(layout);
    if (inputs.q.rows != layout.total_tokens()) {
        throw_validation("shape", "token count " + std::to_string(inputs.q.rows) +
                                      " does not match layout tokens " +
                                      std::to_string(layout.total_tokens()));
    }

    const uint32_t n = inputs.q.rows;
    const uint32_t heads = inputs.q.heads;
    const double scale = 1.0 / std::sqrt(double(inputs.q.dim));
    const auto summaries = select_summary(layout, policy);

    // Key id list per shot: other shots' summaries (ascending shot order),
    // then the shot's own tokens.
    std::vector<std::vector<uint32_t>> shot_keys(layout.shot_count());
    for (uint32_t i = 0; i < layout.shot_count(); ++i) {
        auto& keys = shot_keys[i];
        keys.reserve(size_t(layout.shot_length(i)) +
                     size_t(policy.summary_tokens) * (layout.shot_count() - 1));
        for (uint32_t j = 0; j < layout.shot_count(); ++j) {
            if (j == i) continue;
            keys.insert(keys.end(), summaries[j].begin(), summaries[j].end());
        }
        for (uint32_t t = layout.shot_begin(i); t < layout.shot_end(i); ++t) keys.push_back(t);
    }

    if (cache) {
        cache->shot_keys = shot_keys;
        cache->row_offset.assign(size_t(heads) * n, 0);
        size_t total = 0;
        for (uint32_t h = 0; h < heads; ++h) {
            for (uint32_t i = 0; i < layout.shot_count(); ++i) {
                for (uint32_t r = layout.shot_begin(i); r < layout.shot_end(i); ++r) {
                    cache->row_offset[size_t(h) * n + r] = total;
                    total += shot_keys[i].size();
                }
            }
        }
        cache->probs.assign(total, Real(0));
    }

    HeadMatrixT<Real> out(heads, n, inputs.q.dim);
    for (uint32_t h = 0; h < heads; ++h) {
        for (uint32_t i = 0; i < layout.shot_count(); ++i) {
            const auto& keys = shot_keys[i];
            for (uint32_t r = layout.shot_begin(i); r < layout.shot_end(i); ++r) {
                Real* probs = cache ? cache->probs.data() + cache->row_offset[size_t(h) * n + r]
                                    : nullptr;
                detail::attend_row(inputs.q.row(h, r), inputs.k, inputs.v, h, keys.data(),
                                   keys.size(), scale, out.row(h, r), probs);
                if (stats) stats->pair_evaluations += keys.size();
            }
        }
    }
    return out;
}

// Dense reference: full softmax restricted to mask-permitted columns.
template <typename Real>
HeadMatrixT<Real> masked_dense_oracle(const AttentionInputsT<Real>& inputs,
                                      const AttentionMask& mask) {
    inputs.validate();
    if (mask.tokens != inputs.q.rows) {
        throw_validation("shape", "mask size does not match token count");
    }
    const uint32_t n = inputs.q.rows;
    const double scale = 1.0 / std::sqrt(double(inputs.q.dim));

    HeadMatrixT<Real> out(inputs.q.heads, n, inputs.q.dim);
    std::vector<uint32_t> keys;
    keys.reserve(n);
    for (uint32_t r = 0; r < n; ++r) {
        keys.clear();
        for (uint32_t c = 0; c < n; ++c) {
            if (mask.at(r, c)) keys.push_back(c);
        }
        if (keys.empty()) throw_validation("mask", "row " + std::to_string(r) + " permits no keys");
        for (uint32_t h = 0; h < inputs.q.heads; ++h) {
            detail::attend_row(inputs.q.row(h, r), inputs.k, inputs.v, h, keys.data(), keys.size(),
                               scale, out.row(h, r), static_cast<Real*>(nullptr));
        }
    }
    return out;
}

// Cross-attention where shot i's queries see only shot i's text tokens.
template <typename Real>
HeadMatrixT<Real> windowed_cross_attention(const HeadMatrixT<Real>& q,
                                           const std::vector<HeadMatrixT<Real>>& text_k,
                                           const std::vector<HeadMatrixT<Real>>& text_v,
                                           const ShotLayout& layout) {
    if (q.rows != layout.total_tokens()) {
        throw_validation("shape", "query rows do not match layout tokens");
    }
    if (text_k.size() != layout.shot_count() || text_v.size() != layout.shot_count()) {
        throw_validation("layout", "need one text K/V per shot, got " +
                                       std::to_string(text_k.size()) + "/" +
                                       std::to_string(text_v.size()) + " for " +
                                       std::to_string(layout.shot_count()) + " shots");
    }
    const double scale = 1.0 / std::sqrt(double(q.dim));
    HeadMatrixT<Real> out(q.heads, q.rows, q.dim);
    for (uint32_t i = 0; i < layout.shot_count(); ++i) {
        const auto& k = text_k[i];
        const auto& v = text_v[i];
        if (k.heads != q.heads || v.heads != q.heads || k.dim != q.dim || v.dim != q.dim ||
            k.rows != v.rows || k.rows == 0) {
            throw_validation("shape", "text K/V of shot " + std::to_string(i) +
                                          " does not match query heads/dim");
        }
        std::vector<uint32_t> keys(k.rows);
        for (uint32_t j = 0; j < k.rows; ++j) keys[j] = j;
        for (uint32_t h = 0; h < q.heads; ++h) {
            for (uint32_t r = layout.shot_begin(i); r < layout.shot_end(i); ++r) {
                detail::attend_row(q.row(h, r), k, v, h, keys.data(), keys.size(), scale,
                                   out.row(h, r), static_cast<Real*>(nullptr));
            }
        }
    }
    return out;
}

struct PairCount {
    uint64_t sparse_pairs = 0;
    uint64_t dense_pairs = 0;
    double ratio = 0.0;
};

// Closed-form cost of the sparse pattern vs full attention, in (query, key)
// pairs per head.
inline PairCount count_attention_pairs(const ShotLayout& layout, const SummaryPolicy& policy) {
    policy.validate(layout);
    const uint64_t n = layout.total_tokens();
    PairCount pc;
    pc.dense_pairs = n * n;
    for (uint32_t i = 0; i < layout.shot_count(); ++i) {
        const uint64_t li = layout.shot_length(i);
        pc.sparse_pairs +=
            li * (li + uint64_t(layout.shot_count() - 1) * policy.summary_tokens);
    }
    pc.ratio = double(pc.sparse_pairs) / double(pc.dense_pairs);
    return pc;
}

}  // namespace dcdm
