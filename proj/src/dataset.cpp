#include "ppns/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace ppns {

InteractionSet::InteractionSet(Index num_users, Index num_items, std::vector<Interaction> pairs)
    : num_users_(num_users), num_items_(num_items), pairs_(std::move(pairs)) {
    if (num_users < 0 || num_items < 0) {
        throw std::invalid_argument("InteractionSet: negative dimensions");
    }
    for (const auto& p : pairs_) {
        if (p.user < 0 || p.user >= num_users || p.item < 0 || p.item >= num_items) {
            throw std::out_of_range("InteractionSet: id outside [0, M) x [0, N)");
        }
    }
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());

    user_offsets_.assign(static_cast<std::size_t>(num_users) + 1, 0);
    positives_.reserve(pairs_.size());
    item_user_count_.assign(static_cast<std::size_t>(num_items), 0);
    for (const auto& p : pairs_) {
        ++user_offsets_[static_cast<std::size_t>(p.user) + 1];
        positives_.push_back(p.item);
        ++item_user_count_[static_cast<std::size_t>(p.item)];
    }
    std::partial_sum(user_offsets_.begin(), user_offsets_.end(), user_offsets_.begin());
}

std::span<const Index> InteractionSet::positives(Index user) const {
    if (user < 0 || user >= num_users_) {
        throw std::out_of_range("InteractionSet: user id out of range");
    }
    const auto u = static_cast<std::size_t>(user);
    return std::span<const Index>(positives_).subspan(user_offsets_[u], user_offsets_[u + 1] - user_offsets_[u]);
}

bool InteractionSet::contains(Index user, Index item) const {
    const auto items = positives(user);
    return std::binary_search(items.begin(), items.end(), item);
}

Index InteractionSet::num_negatives(Index user) const {
    return num_items_ - static_cast<Index>(positives(user).size());
}

Index InteractionSet::item_user_count(Index item) const {
    if (item < 0 || item >= num_items_) {
        throw std::out_of_range("InteractionSet: item id out of range");
    }
    return item_user_count_[static_cast<std::size_t>(item)];
}

namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line_number, const char* what) {
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        std::ostringstream msg;
        msg << "line " << line_number << ": cannot parse " << what << " from '" << field << "'";
        throw ParseError(msg.str());
    }
    return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return fields;
}

}  // namespace

InteractionSet load_ratings(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open ratings file: " + path.string());
    }

    std::vector<std::pair<std::int64_t, std::int64_t>> raw;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw ParseError("line " + std::to_string(line_number) + ": expected 4 tab-separated fields, got " +
                             std::to_string(fields.size()));
        }
        const auto user = parse_field<std::int64_t>(fields[0], line_number, "user id");
        const auto item = parse_field<std::int64_t>(fields[1], line_number, "item id");
        const auto rating = parse_field<double>(fields[2], line_number, "rating");
        parse_field<std::int64_t>(fields[3], line_number, "timestamp");
        if (options.rating_threshold && rating < *options.rating_threshold) continue;
        raw.emplace_back(user, item);
    }
    if (line_number == 0 || raw.empty()) {
        throw ParseError("ratings file has no usable records: " + path.string());
    }

    std::map<std::int64_t, Index> user_ids;
    std::map<std::int64_t, Index> item_ids;
    for (const auto& [u, i] : raw) {
        user_ids.emplace(u, 0);
        item_ids.emplace(i, 0);
    }
    std::vector<std::int64_t> raw_users;
    std::vector<std::int64_t> raw_items;
    for (auto& [original, dense] : user_ids) {
        dense = static_cast<Index>(raw_users.size());
        raw_users.push_back(original);
    }
    for (auto& [original, dense] : item_ids) {
        dense = static_cast<Index>(raw_items.size());
        raw_items.push_back(original);
    }

    std::vector<Interaction> pairs;
    pairs.reserve(raw.size());
    for (const auto& [u, i] : raw) {
        pairs.push_back({user_ids.at(u), item_ids.at(i)});
    }
    InteractionSet data(static_cast<Index>(raw_users.size()), static_cast<Index>(raw_items.size()), std::move(pairs));
    data.raw_user_ids = std::move(raw_users);
    data.raw_item_ids = std::move(raw_items);
    return data;
}

SplitDataset split(const InteractionSet& data, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("split ratio must lie in (0, 1)");
    }
    const auto all = data.pairs();
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(all.size()) - 1e-9));
    std::vector<Interaction> train_pairs;
    std::vector<Interaction> test_pairs;
    train_pairs.reserve(n_train);
    test_pairs.reserve(all.size() - n_train);
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < n_train ? train_pairs : test_pairs).push_back(all[order[k]]);
    }

    SplitDataset out{
        InteractionSet(data.num_users(), data.num_items(), std::move(train_pairs)),
        InteractionSet(data.num_users(), data.num_items(), std::move(test_pairs)),
        seed,
        ratio,
    };
    out.train.raw_user_ids = out.test.raw_user_ids = data.raw_user_ids;
    out.train.raw_item_ids = out.test.raw_item_ids = data.raw_item_ids;
    return out;
}

double interaction_ratio(const InteractionSet& train, Index item) {
    if (train.num_users() == 0) return 0.0;
    return static_cast<double>(train.item_user_count(item)) / static_cast<double>(train.num_users());
}

void write_id_maps(const InteractionSet& data, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    const auto write = [](const std::filesystem::path& file, const std::vector<std::int64_t>& ids, Index count) {
        std::ofstream out(file);
        if (!out) throw std::runtime_error("cannot write " + file.string());
        out << "dense,original\n";
        for (Index k = 0; k < count; ++k) {
            out << k << ',' << (ids.empty() ? k : ids[static_cast<std::size_t>(k)]) << '\n';
        }
    };
    write(directory / "user_map.csv", data.raw_user_ids, data.num_users());
    write(directory / "item_map.csv", data.raw_item_ids, data.num_items());
}

}  // namespace ppns
