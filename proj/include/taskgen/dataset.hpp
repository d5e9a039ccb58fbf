#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "taskgen/codegen.hpp"
#include "taskgen/io.hpp"
#include "taskgen/oracle.hpp"

namespace taskgen {

/// Histogram key: (construct-skeleton depth, construct count).
using Bucket = std::pair<int, int>;

enum class Split : std::uint8_t { Train, Val, Test };

inline std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        default: return "test";
    }
}

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw FormatError("unknown split '" + s + "'");
}

struct DatasetItem {
    TaskSpec spec;
    Ast exemplar;
    double oracleScore = 0.0;
    Bucket bucket{1, 0};
};

struct SpecDataset {
    Domain domain = Domain::HoCMaze;
    std::uint64_t seed = 0;
    int oracleRollouts = 0;
    std::vector<DatasetItem> items;
    std::vector<Split> split;  ///< parallel to items
    std::map<Bucket, int> buckets;
};

/// Bucket targets of the stock builds: 1016 specs across five buckets for
/// maze programs, 1027 across four for Karel (the deepest bucket is empty).
inline std::map<Bucket, int> default_bucket_targets(Domain d) {
    if (d == Domain::HoCMaze)
        return {{{1, 0}, 183}, {{2, 1}, 69}, {{2, 2}, 47}, {{3, 2}, 136}, {{3, 3}, 581}};
    return {{{1, 0}, 300}, {{2, 1}, 155}, {{2, 2}, 277}, {{3, 2}, 295}, {{3, 3}, 0}};
}

inline std::vector<Ast> default_structures(Domain d) {
    std::set<TokenKind> kinds;
    for (TokenKind k : domain_constructs(d)) kinds.insert(k);
    return enumerate_structures(d, kinds, 3);
}

inline Bucket bucket_of(const Ast& a) {
    return {struct_depth(a), static_cast<int>(constructs_of(a).size())};
}

/// Static degeneracy screen applied before the (much costlier) oracle run:
/// conditionals with identical branches, constructs with empty bodies, and
/// adjacent inverse action pairs never make good exemplars.
inline bool passes_redundancy_screen(const Ast& code) {
    if (detail::body_has_inverse_pair(code.root.body)) return false;
    bool ok = true;
    auto walk = [&](auto&& self, const AstNode& n) -> void {
        if (is_construct(n.kind) && n.body.empty()) ok = false;
        if (n.kind == TokenKind::IfElse) {
            Ast a, b;
            a.root.body = n.body;
            b.root.body = n.elseBody;
            if (print_code_compact(a) == print_code_compact(b)) ok = false;
        }
        for (const AstNode& c : n.body) self(self, c);
        for (const AstNode& c : n.elseBody) self(self, c);
    };
    walk(walk, code.root);
    return ok;
}

struct DatasetConfig {
    int oracleRollouts = 10000;  ///< rollouts per candidate; raise for higher-fidelity builds
    double qualThreshold = 0.3;  ///< minimal trace quality of the oracle task
    int candidateBudget = 4000;  ///< oracle evaluations allowed per accepted spec
    int minExemplarBlocks = 6;   ///< static floor; shorter codes cannot clear the quality bar
    int sizeCap = 17;            ///< largest spec size (and code sampling budget)
    std::uint64_t seed = 7;
    ExecConfig exec;
};

/// Builds a spec dataset: per bucket, sample codes from the bucket's
/// structures, keep those whose oracle task scores above the quality bar,
/// and derive the spec (masked sketch, all-unknown 16x16 grid, basic-action
/// delta, random size within [code blocks, sizeCap]). Deterministic in
/// cfg.seed. Throws StructureUnsatisfiable when a bucket cannot be filled.
inline SpecDataset build_dataset(Domain domain, const std::vector<Ast>& structures,
                                 const std::map<Bucket, int>& targets, const DatasetConfig& cfg = {}) {
    SpecDataset ds;
    ds.domain = domain;
    ds.seed = cfg.seed;
    ds.oracleRollouts = cfg.oracleRollouts;

    std::map<Bucket, std::vector<const Ast*>> pools;
    for (const Ast& st : structures) {
        if (st.domain != domain) throw DomainError("structure domain differs from the dataset domain");
        pools[bucket_of(st)].push_back(&st);
    }

    std::uint64_t stream = 0;
    for (const auto& [bucket, want] : targets) {
        if (want <= 0) continue;
        const auto poolIt = pools.find(bucket);
        if (poolIt == pools.end())
            throw StructureUnsatisfiable("no structure with depth " + std::to_string(bucket.first) +
                                         " and " + std::to_string(bucket.second) + " constructs");
        const std::vector<const Ast*>& pool = poolIt->second;
        Rng rng(derive_seed(cfg.seed, (static_cast<std::uint64_t>(bucket.first) << 8) |
                                          static_cast<std::uint64_t>(bucket.second)));
        int made = 0;
        long long oracleCalls = 0, draws = 0;
        const long long budget = static_cast<long long>(cfg.candidateBudget) * want;
        while (made < want) {
            // Static rejections are near-free; only oracle evaluations count
            // against the budget. The draw cap bounds degenerate pools.
            if (oracleCalls >= budget || ++draws > 400 * budget)
                throw StructureUnsatisfiable("bucket (" + std::to_string(bucket.first) + "," +
                                             std::to_string(bucket.second) + ") exhausted its sampling budget");
            const Ast& st = *pool[rng.next_below(pool.size())];
            const TaskSpec sample = make_spec(domain, st, cfg.sizeCap, 16);
            Ast code;
            try {
                code = generate_code_uniform(sample, rng);
            } catch (const std::exception&) {
                continue;
            }
            if (attributes(code).nblock < cfg.minExemplarBlocks) continue;
            if (!passes_redundancy_screen(code)) continue;
            ++oracleCalls;
            const OracleResult orc =
                task_oracle(code, sample, cfg.oracleRollouts,
                            derive_seed(cfg.seed, 0xD5000000ULL + stream++), cfg.exec);
            if (orc.score <= 0.0) continue;
            if (score_code_task(code, orc.task, cfg.exec).qual < cfg.qualThreshold) continue;

            const auto cs = constructs_of(code);
            std::set<int> mask;
            for (int i = 0; i < static_cast<int>(cs.size()); ++i)
                if (cs[static_cast<std::size_t>(i)]->kind != TokenKind::RepeatUntil && rng.next_below(2) == 1)
                    mask.insert(i);
            const Ast sketch = sketch_of(code, mask);
            const int nblock = attributes(code).nblock;
            const int size =
                nblock + static_cast<int>(rng.next_below(static_cast<std::size_t>(cfg.sizeCap - nblock) + 1));

            DatasetItem item;
            item.spec = make_spec(domain, sketch, size, 16);
            item.exemplar = code;
            item.oracleScore = orc.score;
            item.bucket = bucket;
            ds.items.push_back(std::move(item));
            ds.buckets[bucket] += 1;
            ++made;
        }
    }

    // Fixed 80/10/10 split: shuffle once with a seed-derived stream, then
    // carve validation and test off the tail.
    const std::size_t n = ds.items.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng srng(derive_seed(cfg.seed, 0x59117ULL));
    srng.shuffle(order);
    const std::size_t nVal = n / 10, nTest = n / 10, nTrain = n - nVal - nTest;
    ds.split.assign(n, Split::Train);
    for (std::size_t i = nTrain; i < nTrain + nVal; ++i) ds.split[order[i]] = Split::Val;
    for (std::size_t i = nTrain + nVal; i < n; ++i) ds.split[order[i]] = Split::Test;
    return ds;
}

inline SpecDataset build_dataset(Domain domain, const DatasetConfig& cfg = {}) {
    return build_dataset(domain, default_structures(domain), default_bucket_targets(domain), cfg);
}

inline std::string dataset_item_id(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05zu", i);
    return buf;
}

/// Directory layout: specs/<id>.json, exemplars/<id>.code, manifest.json
/// (domain, seed, bucket counts, per-item bucket/score/split).
inline void write_dataset(const SpecDataset& ds, const std::filesystem::path& dir) {
    Json manifest;
    manifest["domain"] = to_string(ds.domain);
    manifest["seed"] = ds.seed;
    manifest["oracleRollouts"] = ds.oracleRollouts;
    manifest["count"] = ds.items.size();
    for (const auto& [bucket, count] : ds.buckets)
        manifest["buckets"].push_back({{"depth", bucket.first}, {"constructs", bucket.second}, {"count", count}});
    manifest["items"] = Json::array();
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        const DatasetItem& item = ds.items[i];
        const std::string id = dataset_item_id(i);
        write_json_file(dir / "specs" / (id + ".json"), spec_to_json(item.spec));
        write_text_file(dir / "exemplars" / (id + ".code"), print_code(item.exemplar) + "\n");
        manifest["items"].push_back({{"id", id},
                                     {"bucket", {item.bucket.first, item.bucket.second}},
                                     {"oracleScore", item.oracleScore},
                                     {"split", to_string(ds.split[i])}});
    }
    write_json_file(dir / "manifest.json", manifest);
}

inline SpecDataset read_dataset(const std::filesystem::path& dir) {
    const Json manifest = read_json_file(dir / "manifest.json");
    SpecDataset ds;
    try {
        ds.domain = domain_from_string(manifest.at("domain").get<std::string>());
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        ds.oracleRollouts = manifest.at("oracleRollouts").get<int>();
        for (const Json& j : manifest.at("items")) {
            const std::string id = j.at("id").get<std::string>();
            DatasetItem item;
            item.spec = load_spec_file(dir / "specs" / (id + ".json"));
            item.exemplar = parse_code(read_text_file(dir / "exemplars" / (id + ".code")), ds.domain);
            item.oracleScore = j.at("oracleScore").get<double>();
            item.bucket = {j.at("bucket").at(0).get<int>(), j.at("bucket").at(1).get<int>()};
            ds.buckets[item.bucket] += 1;
            ds.split.push_back(split_from_string(j.at("split").get<std::string>()));
            ds.items.push_back(std::move(item));
        }
    } catch (const Json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    if (ds.items.size() != manifest.at("count").get<std::size_t>())
        throw FormatError("manifest count disagrees with its item list");
    return ds;
}

/// The items of one split, as (spec, exemplar) pairs for the trainers.
inline std::vector<std::size_t> split_indices(const SpecDataset& ds, Split which) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ds.items.size(); ++i)
        if (ds.split[i] == which) out.push_back(i);
    return out;
}

}  // namespace taskgen
