#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppns {

using Index = std::int32_t;

struct Interaction {
    Index user;
    Index item;

    friend bool operator==(const Interaction&, const Interaction&) = default;
    friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary implicit-feedback matrix over dense ids. Immutable once built.
class InteractionSet {
public:
    InteractionSet() = default;

    // Deduplicates `pairs`; every id must lie in [0, num_users) x [0, num_items).
    InteractionSet(Index num_users, Index num_items, std::vector<Interaction> pairs);

    Index num_users() const { return num_users_; }
    Index num_items() const { return num_items_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    // Sorted by (user, item).
    std::span<const Interaction> pairs() const { return pairs_; }

    // Sorted item ids of I_u^+.
    std::span<const Index> positives(Index user) const;
    bool contains(Index user, Index item) const;

    // |I_u^-| = N - |I_u^+|.
    Index num_negatives(Index user) const;

    std::span<const Index> item_user_counts() const { return item_user_count_; }
    Index item_user_count(Index item) const;

    // Original ids, indexed by dense id. Empty when the set was built from dense ids directly.
    std::vector<std::int64_t> raw_user_ids;
    std::vector<std::int64_t> raw_item_ids;

private:
    Index num_users_ = 0;
    Index num_items_ = 0;
    std::vector<Interaction> pairs_;
    std::vector<std::size_t> user_offsets_;  // CSR offsets into positives_
    std::vector<Index> positives_;
    std::vector<Index> item_user_count_;
};

struct SplitDataset {
    InteractionSet train;
    InteractionSet test;
    std::uint64_t split_seed = 0;
    double split_ratio = 0.8;
};

struct LoadOptions {
    // Ratings strictly below the threshold are dropped. Unset keeps every rated pair.
    std::optional<double> rating_threshold;
};

// Reads a MovieLens u.data style file: user \t item \t rating \t timestamp.
// Ids are remapped to dense 0-based ranges in ascending order of the original id.
InteractionSet load_ratings(const std::filesystem::path& path, const LoadOptions& options = {});

// Global uniform partition of the pairs; train receives ceil(ratio * |pairs|).
SplitDataset split(const InteractionSet& data, double ratio, std::uint64_t seed);

// Fraction of all users that interacted with `item`; the false-negative prior.
double interaction_ratio(const InteractionSet& train, Index item);

// Writes `dense,original` CSV sidecars for users and items.
void write_id_maps(const InteractionSet& data, const std::filesystem::path& directory);

}  // namespace ppns
