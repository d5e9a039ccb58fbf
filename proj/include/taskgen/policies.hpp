#pragma once

#include <array>
#include <numeric>

#include "taskgen/codegen.hpp"
#include "taskgen/io.hpp"
#include "taskgen/nn.hpp"
#include "taskgen/oracle.hpp"
#include "taskgen/symexec.hpp"

namespace taskgen {

// ---------------------------------------------------------------------------
// Code policy: token stream -> two-layer LSTM -> dictionary logits
// ---------------------------------------------------------------------------

struct CodeNetConfig {
    int tokenDim = 16;
    int budgetDim = 8;
    int budgetMax = 20;  ///< budgets clamp into [0, budgetMax] before lookup
    int hidden = 48;
};

/// Recurrent sketch-completion policy. Each token of the linearized code,
/// together with the open action budget, advances a two-layer LSTM; decision
/// logits are a linear readout of the top hidden state.
class CodePolicyNet final : public CodegenPolicy {
  public:
    explicit CodePolicyNet(CodeNetConfig cfg = {}, std::uint64_t seed = 0) : cfg_(cfg) {
        Rng rng(seed);
        tok_ = nn::Embedding(dict::kSize, cfg_.tokenDim, rng);
        bud_ = nn::Embedding(cfg_.budgetMax + 1, cfg_.budgetDim, rng);
        lower_ = nn::LstmLayer(cfg_.tokenDim + cfg_.budgetDim, cfg_.hidden, rng);
        upper_ = nn::LstmLayer(cfg_.hidden, cfg_.hidden, rng);
        head_ = nn::Dense(cfg_.hidden, dict::kSize, rng);
        clear_state();
    }

    const CodeNetConfig& config() const { return cfg_; }

    void reset(const TaskSpec& spec) override {
        clear_state();
        feed(dict::kBos, spec.size);
    }

    void observe(int tok, int budget) override { feed(tok, budget); }

    std::vector<double> logits(const DecisionPoint&) override { return head_.forward(h1_); }

    /// Tokens consumed since reset; decision i reads the state after step
    /// step_count()-1.
    std::size_t step_count() const { return tape_.size(); }

    struct DecisionGrad {
        std::size_t step = 0;
        std::vector<double> dlogits;
    };

    /// Backpropagates decision-level logit gradients through the recorded
    /// episode, accumulating parameter gradients.
    void backprop(const std::vector<DecisionGrad>& decisions) {
        const std::size_t n = tape_.size();
        std::vector<std::vector<double>> dh1(n);
        for (const DecisionGrad& d : decisions) {
            std::vector<double> dh = head_.backward(tape_[d.step].top.h, d.dlogits);
            if (dh1[d.step].empty())
                dh1[d.step] = std::move(dh);
            else
                for (std::size_t i = 0; i < dh.size(); ++i) dh1[d.step][i] += dh[i];
        }
        const std::size_t hid = static_cast<std::size_t>(cfg_.hidden);
        std::vector<double> dh1Next(hid, 0.0), dc1Next(hid, 0.0);
        std::vector<double> dh0Next(hid, 0.0), dc0Next(hid, 0.0);
        for (std::size_t t = n; t-- > 0;) {
            std::vector<double> dhTop = dh1Next;
            if (!dh1[t].empty())
                for (std::size_t i = 0; i < hid; ++i) dhTop[i] += dh1[t][i];
            std::vector<double> dxTop, dhPrev, dcPrev;
            upper_.backward(tape_[t].top, dhTop, dc1Next, dxTop, dhPrev, dcPrev);
            dh1Next = std::move(dhPrev);
            dc1Next = std::move(dcPrev);
            std::vector<double> dhLow = dh0Next;
            for (std::size_t i = 0; i < hid; ++i) dhLow[i] += dxTop[i];
            std::vector<double> dx, dhPrev0, dcPrev0;
            lower_.backward(tape_[t].low, dhLow, dc0Next, dx, dhPrev0, dcPrev0);
            dh0Next = std::move(dhPrev0);
            dc0Next = std::move(dcPrev0);
            tok_.backward(tape_[t].tok, std::vector<double>(dx.begin(), dx.begin() + cfg_.tokenDim));
            bud_.backward(tape_[t].bud, std::vector<double>(dx.begin() + cfg_.tokenDim, dx.end()));
        }
    }

    std::vector<nn::Param*> params() {
        return {&tok_.table, &bud_.table, &lower_.Wih, &lower_.Whh, &lower_.bias,
                &upper_.Wih, &upper_.Whh, &upper_.bias, &head_.W, &head_.b};
    }

    nn::Json to_json() const {
        nn::Json j;
        j["version"] = 1;
        j["kind"] = "code-policy";
        j["tokenDim"] = cfg_.tokenDim;
        j["budgetDim"] = cfg_.budgetDim;
        j["budgetMax"] = cfg_.budgetMax;
        j["hidden"] = cfg_.hidden;
        j["tensors"] = nn::params_to_json(named(const_cast<CodePolicyNet&>(*this)));
        return j;
    }

    static CodePolicyNet from_json(const nn::Json& j) {
        if (!j.is_object() || j.value("kind", std::string()) != "code-policy")
            throw CheckpointError("not a code policy checkpoint");
        if (j.value("version", 0) != 1) throw CheckpointError("unsupported code policy version");
        CodeNetConfig cfg;
        try {
            cfg.tokenDim = j.at("tokenDim").get<int>();
            cfg.budgetDim = j.at("budgetDim").get<int>();
            cfg.budgetMax = j.at("budgetMax").get<int>();
            cfg.hidden = j.at("hidden").get<int>();
        } catch (const nn::Json::exception& e) {
            throw CheckpointError(e.what());
        }
        CodePolicyNet net(cfg, 0);
        auto named = CodePolicyNet::named(net);
        std::vector<std::pair<std::string, nn::Param*>> mut;
        mut.reserve(named.size());
        for (auto& [name, p] : named) mut.emplace_back(name, const_cast<nn::Param*>(p));
        nn::params_from_json(j.at("tensors"), mut);
        return net;
    }

  private:
    struct Step {
        int tok = 0;
        int bud = 0;
        nn::LstmLayer::Cache low, top;
    };

    static std::vector<std::pair<std::string, const nn::Param*>> named(CodePolicyNet& n) {
        return {{"token-embedding", &n.tok_.table}, {"budget-embedding", &n.bud_.table},
                {"lstm0-input", &n.lower_.Wih},     {"lstm0-recurrent", &n.lower_.Whh},
                {"lstm0-bias", &n.lower_.bias},     {"lstm1-input", &n.upper_.Wih},
                {"lstm1-recurrent", &n.upper_.Whh}, {"lstm1-bias", &n.upper_.bias},
                {"head-weight", &n.head_.W},        {"head-bias", &n.head_.b}};
    }

    void clear_state() {
        const std::size_t hid = static_cast<std::size_t>(cfg_.hidden);
        h0_.assign(hid, 0.0);
        c0_.assign(hid, 0.0);
        h1_.assign(hid, 0.0);
        c1_.assign(hid, 0.0);
        tape_.clear();
    }

    void feed(int tok, int budget) {
        Step st;
        st.tok = tok;
        st.bud = std::clamp(budget, 0, cfg_.budgetMax);
        std::vector<double> x = tok_.forward(st.tok);
        const std::vector<double> b = bud_.forward(st.bud);
        x.insert(x.end(), b.begin(), b.end());
        lower_.forward(x, h0_, c0_, st.low);
        h0_ = st.low.h;
        c0_ = st.low.c;
        upper_.forward(h0_, h1_, c1_, st.top);
        h1_ = st.top.h;
        c1_ = st.top.c;
        tape_.push_back(std::move(st));
    }

    CodeNetConfig cfg_;
    nn::Embedding tok_, bud_;
    nn::LstmLayer lower_, upper_;
    nn::Dense head_;
    std::vector<double> h0_, c0_, h1_, c1_;
    std::vector<Step> tape_;
};

// ---------------------------------------------------------------------------
// Imitation targets
// ---------------------------------------------------------------------------

namespace detail {

/// Aligns a sketch body with an exemplar body and appends the decision
/// tokens in engine order: hole actions then end-of-body, construct slots
/// right after the construct. Holes absorb greedily, backtracking when a
/// fixed element needs the actions for itself.
inline bool target_walk(const std::vector<AstNode>& sk, std::size_t i, const std::vector<AstNode>& ex,
                        std::size_t j, std::vector<int>& out) {
    if (i == sk.size()) return j == ex.size();
    const AstNode& el = sk[i];
    if (el.hole) {
        std::size_t run = j;
        while (run < ex.size() && !ex[run].hole && is_action(ex[run].kind)) ++run;
        for (std::size_t k = run; k + 1 > j; --k) {
            const std::size_t mark = out.size();
            for (std::size_t a = j; a < k; ++a) out.push_back(dict::of_token(ex[a].kind));
            out.push_back(dict::kEnd);
            if (target_walk(sk, i + 1, ex, k, out)) return true;
            out.resize(mark);
        }
        return false;
    }
    if (j >= ex.size() || ex[j].hole || ex[j].kind != el.kind) return false;
    if (is_action(el.kind)) return target_walk(sk, i + 1, ex, j + 1, out);

    const std::size_t mark = out.size();
    if (el.kind == TokenKind::Repeat) {
        if (el.iter == 0)
            out.push_back(dict::of_iterator(ex[j].iter));
        else if (el.iter != ex[j].iter)
            return false;
    } else if (el.kind != TokenKind::RepeatUntil) {
        if (!el.cond.has_value())
            out.push_back(dict::of_condition(*ex[j].cond));
        else if (el.cond != ex[j].cond)
            return false;
    }
    if (!target_walk(el.body, 0, ex[j].body, 0, out)) {
        out.resize(mark);
        return false;
    }
    if (el.kind == TokenKind::IfElse && !target_walk(el.elseBody, 0, ex[j].elseBody, 0, out)) {
        out.resize(mark);
        return false;
    }
    if (!target_walk(sk, i + 1, ex, j + 1, out)) {
        out.resize(mark);
        return false;
    }
    return true;
}

}  // namespace detail

/// Dictionary tokens chosen at each open decision when completing
/// `spec.sketch` into `exemplar`, in decision order. Throws ExemplarMismatch
/// when the exemplar is not a completion of the sketch under the spec.
inline std::vector<int> decision_targets(const TaskSpec& spec, const Ast& exemplar) {
    if (exemplar.domain != spec.domain) throw ExemplarMismatch("exemplar domain differs from the spec");
    try {
        validate(exemplar, false);
    } catch (const std::exception& e) {
        throw ExemplarMismatch(std::string("exemplar is not a complete program: ") + e.what());
    }
    std::vector<int> targets;
    if (!detail::target_walk(spec.sketch.root.body, 0, exemplar.root.body, 0, targets))
        throw ExemplarMismatch("exemplar does not match the sketch shape");

    // Replay through the completion engine: every target must be legal in
    // order (size budget, allowed blocks) and reproduce the exemplar.
    std::size_t at = 0;
    try {
        const Ast again = complete_sketch(spec, [&](const DecisionPoint&) -> int {
            if (at >= targets.size()) throw ExemplarMismatch("exemplar leaves choices open");
            return targets[at++];
        });
        if (at != targets.size() || print_code_compact(again) != print_code_compact(exemplar))
            throw ExemplarMismatch("exemplar deviates from its own replay");
    } catch (const ExemplarMismatch&) {
        throw;
    } catch (const std::exception& e) {
        throw ExemplarMismatch(std::string("exemplar does not complete the sketch: ") + e.what());
    }
    return targets;
}

namespace detail {

inline void collect_nodes(AstNode& n, std::vector<AstNode*>& out) {
    for (AstNode& c : n.body) {
        if (is_construct(c.kind)) {
            out.push_back(&c);
            collect_nodes(c, out);
        }
    }
    for (AstNode& c : n.elseBody) {
        if (is_construct(c.kind)) {
            out.push_back(&c);
            collect_nodes(c, out);
        }
    }
}

}  // namespace detail

/// Exemplar variants that reassign every condition/iterator slot left open by
/// the sketch, original assignment first, capped at `cap` variants.
inline std::vector<Ast> instantiation_variants(const TaskSpec& spec, const Ast& exemplar,
                                               std::size_t cap = 64) {
    const std::vector<const AstNode*> skCons = constructs_of(spec.sketch);
    Ast base = exemplar;
    std::vector<AstNode*> exCons;
    detail::collect_nodes(base.root, exCons);
    if (skCons.size() != exCons.size()) return {exemplar};

    struct Slot {
        std::size_t at;             ///< construct index
        std::vector<int> iters;     ///< nonempty for iterator slots
        std::vector<Condition> conds;
    };
    std::vector<Slot> slots;
    for (std::size_t k = 0; k < skCons.size(); ++k) {
        const AstNode& s = *skCons[k];
        if (s.kind == TokenKind::Repeat && s.iter == 0) {
            Slot sl{k, {}, {}};
            sl.iters.push_back(exCons[k]->iter);
            for (int it = kMinIterator; it <= kMaxIterator; ++it)
                if (spec.delta.iterators.count(it) && it != exCons[k]->iter) sl.iters.push_back(it);
            slots.push_back(std::move(sl));
        } else if ((s.kind == TokenKind::If || s.kind == TokenKind::IfElse ||
                    s.kind == TokenKind::While) &&
                   !s.cond.has_value()) {
            Slot sl{k, {}, {}};
            sl.conds.push_back(*exCons[k]->cond);
            for (Condition b : domain_conditions(spec.domain))
                if (spec.delta.booleans.count(b) && b != *exCons[k]->cond) sl.conds.push_back(b);
            slots.push_back(std::move(sl));
        }
    }

    std::vector<Ast> out;
    std::vector<std::size_t> odo(slots.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const Slot& sl = slots[i];
            if (!sl.iters.empty())
                exCons[sl.at]->iter = sl.iters[odo[i]];
            else
                exCons[sl.at]->cond = sl.conds[odo[i]];
        }
        out.push_back(base);
        if (out.size() >= cap) break;
        std::size_t i = 0;
        for (; i < slots.size(); ++i) {
            const std::size_t n = slots[i].iters.empty() ? slots[i].conds.size() : slots[i].iters.size();
            if (++odo[i] < n) break;
            odo[i] = 0;
        }
        if (i == slots.size()) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Imitation training
// ---------------------------------------------------------------------------

struct CodeTrainExample {
    TaskSpec spec;
    Ast exemplar;
};

struct TrainCodeConfig {
    int epochs = 40;
    int batch = 16;
    nn::AdamConfig adam;
    double clipNorm = 5.0;
    bool augment = true;          ///< add every open-slot instantiation of each exemplar
    std::size_t augmentCap = 64;  ///< variants kept per exemplar
    std::uint64_t seed = 1;
};

struct TrainCodeReport {
    std::vector<double> epochLoss;      ///< mean cross entropy per decision
    std::vector<double> epochAccuracy;  ///< decisions where the argmax hits the target
};

/// Supervised sketch-completion training: every decision of every exemplar
/// is a classification target over the legal set, with the target fed back
/// into the stream (teacher forcing).
inline TrainCodeReport train_code_policy(CodePolicyNet& net, const std::vector<CodeTrainExample>& data,
                                         const TrainCodeConfig& cfg = {}) {
    if (data.empty()) throw NoValidCodes("code policy training needs at least one exemplar");
    std::vector<std::pair<TaskSpec, std::vector<int>>> items;
    for (const CodeTrainExample& ex : data) {
        const std::vector<Ast> variants =
            cfg.augment ? instantiation_variants(ex.spec, ex.exemplar, cfg.augmentCap)
                        : std::vector<Ast>{ex.exemplar};
        for (const Ast& v : variants) items.emplace_back(ex.spec, decision_targets(ex.spec, v));
    }

    nn::Adam opt(net.params(), cfg.adam);
    Rng shuffler(cfg.seed);
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainCodeReport rep;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffler.shuffle(order);
        double lossSum = 0.0;
        long decisions = 0, hits = 0;
        int inBatch = 0;
        for (std::size_t idx : order) {
            const TaskSpec& spec = items[idx].first;
            const std::vector<int>& targets = items[idx].second;
            std::size_t at = 0;
            std::vector<CodePolicyNet::DecisionGrad> grads;
            net.reset(spec);
            complete_sketch(
                spec,
                [&](const DecisionPoint& d) {
                    const std::vector<double> lg = net.logits(d);
                    const int target = targets[at++];
                    nn::LossGrad ce = nn::masked_cross_entropy(lg, d.legal, target);
                    lossSum += ce.loss;
                    ++decisions;
                    int best = d.legal[0];
                    for (int t : d.legal)
                        if (lg[static_cast<std::size_t>(t)] > lg[static_cast<std::size_t>(best)]) best = t;
                    if (best == target) ++hits;
                    grads.push_back({net.step_count() - 1, std::move(ce.dlogits)});
                    return target;
                },
                [&](int t, int b) { net.observe(t, b); });
            net.backprop(grads);
            if (++inBatch == cfg.batch) {
                nn::scale_grads(net.params(), 1.0 / inBatch);
                nn::clip_grad_norm(net.params(), cfg.clipNorm);
                opt.step();
                inBatch = 0;
            }
        }
        if (inBatch > 0) {
            nn::scale_grads(net.params(), 1.0 / inBatch);
            nn::clip_grad_norm(net.params(), cfg.clipNorm);
            opt.step();
        }
        rep.epochLoss.push_back(decisions > 0 ? lossSum / static_cast<double>(decisions) : 0.0);
        rep.epochAccuracy.push_back(decisions > 0 ? static_cast<double>(hits) / static_cast<double>(decisions)
                                                  : 1.0);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Puzzle policy: grid planes -> conv stack -> dense trunk -> two heads
// ---------------------------------------------------------------------------

/// Grid plane names fed to the puzzle policy, in channel order.
inline std::vector<std::string> puzzle_channel_names(Domain d) {
    std::vector<std::string> names = {"wall", "free", "unknown"};
    if (d == Domain::HoCMaze)
        names.push_back("goal");
    else {
        names.push_back("pre-markers");
        names.push_back("cur-markers");
        names.push_back("marker-undecided");
    }
    for (const char* s : {"facing-n", "facing-e", "facing-s", "facing-w", "visited", "current",
                          "preset", "start"})
        names.emplace_back(s);
    return names;
}

inline int puzzle_channel_count(Domain d) { return d == Domain::HoCMaze ? 12 : 14; }

/// Renders a generation state onto a fixed square canvas of stacked planes.
/// Grids smaller than the canvas sit in the top-left corner; cells outside
/// the grid read as walls.
inline std::vector<double> encode_puzzle_planes(const SymState& s, int canvas) {
    const Grid& pg = s.partial;
    if (pg.rows > canvas || pg.cols > canvas) throw DomainError("grid exceeds the policy canvas");
    const Domain dom = s.spec.domain;
    const int C = puzzle_channel_count(dom);
    const std::size_t area = static_cast<std::size_t>(canvas) * canvas;
    std::vector<double> x(static_cast<std::size_t>(C) * area, 0.0);
    auto plane = [&](int c) { return x.data() + static_cast<std::size_t>(c) * area; };
    auto cell = [&](int r, int c) { return static_cast<std::size_t>(r) * canvas + c; };

    for (int r = 0; r < canvas; ++r)
        for (int c = 0; c < canvas; ++c) {
            if (r >= pg.rows || c >= pg.cols) {
                plane(0)[cell(r, c)] = 1.0;
                continue;
            }
            switch (pg.at(r, c)) {
                case Cell::Wall: plane(0)[cell(r, c)] = 1.0; break;
                case Cell::Free: plane(1)[cell(r, c)] = 1.0; break;
                case Cell::Unknown: plane(2)[cell(r, c)] = 1.0; break;
            }
        }

    int at = 3;
    if (dom == Domain::HoCMaze) {
        const auto& goal = pg.goal ? pg.goal : s.spec.puzzleInit.goal;
        if (goal) plane(at)[cell(goal->first, goal->second)] = 1.0;
        at += 1;
    } else {
        for (int r = 0; r < pg.rows; ++r)
            for (int c = 0; c < pg.cols; ++c) {
                plane(at)[cell(r, c)] = pg.marker_at(r, c) / static_cast<double>(kMarkerCap);
                plane(at + 1)[cell(r, c)] = s.board.marker_at(r, c) / static_cast<double>(kMarkerCap);
                if (!s.markerKnown[static_cast<std::size_t>(r) * pg.cols + c])
                    plane(at + 2)[cell(r, c)] = 1.0;
            }
        at += 3;
    }

    if (s.poseSet) {
        plane(at + static_cast<int>(s.pose.dir))[cell(s.pose.row, s.pose.col)] = 1.0;
        plane(at + 5)[cell(s.pose.row, s.pose.col)] = 1.0;  // current
        plane(at + 4)[cell(s.pose.row, s.pose.col)] = 1.0;  // visited
    }
    if (pg.avatar) {
        plane(at + 4)[cell(pg.avatar->row, pg.avatar->col)] = 1.0;
        plane(at + 7)[cell(pg.avatar->row, pg.avatar->col)] = 1.0;  // start
    }
    for (const TraceEntry& te : s.trace) plane(at + 4)[cell(te.pose.row, te.pose.col)] = 1.0;

    const Grid& init = s.spec.puzzleInit;
    for (int r = 0; r < init.rows && r < canvas; ++r)
        for (int c = 0; c < init.cols && c < canvas; ++c)
            if (init.at(r, c) != Cell::Unknown) plane(at + 6)[cell(r, c)] = 1.0;
    if (init.avatar) plane(at + 6)[cell(init.avatar->row, init.avatar->col)] = 1.0;
    if (init.goal) plane(at + 6)[cell(init.goal->first, init.goal->second)] = 1.0;
    return x;
}

struct PuzzleNetConfig {
    int canvas = 16;  ///< square canvas side; must divide by 8 for the three pools
    int conv1 = 8;
    int conv2 = 16;
    int conv3 = 16;
    std::array<int, 5> fc = {64, 64, 48, 48, 32};
    int shared = 48;
};

/// Convolutional puzzle-generation policy with an action head over the
/// decision alphabet and a scalar value head.
class PuzzlePolicyNet final : public PuzzlePolicy {
  public:
    explicit PuzzlePolicyNet(Domain domain, PuzzleNetConfig cfg = {}, std::uint64_t seed = 0)
        : dom_(domain), cfg_(cfg) {
        if (cfg_.canvas % 8 != 0 || cfg_.canvas <= 0)
            throw std::invalid_argument("canvas side must be a positive multiple of 8");
        Rng rng(seed);
        conv1_ = nn::Conv3x3(puzzle_channel_count(dom_), cfg_.conv1, rng);
        conv2_ = nn::Conv3x3(cfg_.conv1, cfg_.conv2, rng);
        conv3_ = nn::Conv3x3(cfg_.conv2, cfg_.conv3, rng);
        const int flat = cfg_.conv3 * (cfg_.canvas / 8) * (cfg_.canvas / 8);
        int prev = flat;
        for (std::size_t i = 0; i < fc_.size(); ++i) {
            fc_[i] = nn::Dense(prev, cfg_.fc[i], rng);
            prev = cfg_.fc[i];
        }
        shared_ = nn::Dense(prev + sym_feature_count(dom_), cfg_.shared, rng);
        action_ = nn::Dense(cfg_.shared, kSymActionCount, rng);
        value_ = nn::Dense(cfg_.shared, 1, rng);
    }

    Domain domain() const { return dom_; }
    const PuzzleNetConfig& config() const { return cfg_; }

    struct Forward {
        std::vector<double> planes;
        std::vector<double> z1, a1, p1, z2, a2, p2, z3, a3, p3;
        std::array<std::vector<double>, 5> fcIn, fcZ;
        std::vector<double> concat, sharedZ, sharedA, logits;
        double value = 0.0;
    };

    Forward forward_full(const SymState& s) const {
        if (s.spec.domain != dom_) throw DomainError("state domain does not match the policy");
        if (static_cast<int>(s.features.size()) != sym_feature_count(dom_))
            throw DomainError("state feature vector has the wrong length");
        Forward f;
        f.planes = encode_puzzle_planes(s, cfg_.canvas);
        const int s1 = cfg_.canvas, s2 = s1 / 2, s4 = s2 / 2;
        f.z1 = conv1_.forward(f.planes, s1, s1);
        f.a1 = nn::relu(f.z1);
        f.p1 = nn::maxpool2(f.a1, cfg_.conv1, s1, s1);
        f.z2 = conv2_.forward(f.p1, s2, s2);
        f.a2 = nn::relu(f.z2);
        f.p2 = nn::maxpool2(f.a2, cfg_.conv2, s2, s2);
        f.z3 = conv3_.forward(f.p2, s4, s4);
        f.a3 = nn::relu(f.z3);
        f.p3 = nn::maxpool2(f.a3, cfg_.conv3, s4, s4);
        std::vector<double> cur = f.p3;
        for (std::size_t i = 0; i < fc_.size(); ++i) {
            f.fcIn[i] = cur;
            f.fcZ[i] = fc_[i].forward(cur);
            cur = nn::relu(f.fcZ[i]);
        }
        cur.insert(cur.end(), s.features.begin(), s.features.end());
        f.concat = std::move(cur);
        f.sharedZ = shared_.forward(f.concat);
        f.sharedA = nn::relu(f.sharedZ);
        f.logits = action_.forward(f.sharedA);
        f.value = value_.forward(f.sharedA)[0];
        return f;
    }

    std::vector<double> logits(const SymState& s) override { return forward_full(s).logits; }
    double value(const SymState& s) override { return forward_full(s).value; }

    /// Accumulates parameter gradients for one forward pass given gradients
    /// on the action logits and on the value output.
    void backward(const Forward& f, const std::vector<double>& dlogits, double dvalue) {
        std::vector<double> dShared = action_.backward(f.sharedA, dlogits);
        const std::vector<double> dv = value_.backward(f.sharedA, {dvalue});
        for (std::size_t i = 0; i < dShared.size(); ++i) dShared[i] += dv[i];
        const std::vector<double> dSharedZ = nn::relu_backward(f.sharedZ, dShared);
        const std::vector<double> dConcat = shared_.backward(f.concat, dSharedZ);
        std::vector<double> cur(dConcat.begin(), dConcat.begin() + cfg_.fc.back());
        for (std::size_t i = fc_.size(); i-- > 0;) {
            cur = nn::relu_backward(f.fcZ[i], cur);
            cur = fc_[i].backward(f.fcIn[i], cur);
        }
        const int s1 = cfg_.canvas, s2 = s1 / 2, s4 = s2 / 2;
        std::vector<double> dA3 = nn::maxpool2_backward(f.a3, cfg_.conv3, s4, s4, cur);
        std::vector<double> dZ3 = nn::relu_backward(f.z3, dA3);
        std::vector<double> dP2 = conv3_.backward(f.p2, s4, s4, dZ3);
        std::vector<double> dA2 = nn::maxpool2_backward(f.a2, cfg_.conv2, s2, s2, dP2);
        std::vector<double> dZ2 = nn::relu_backward(f.z2, dA2);
        std::vector<double> dP1 = conv2_.backward(f.p1, s2, s2, dZ2);
        std::vector<double> dA1 = nn::maxpool2_backward(f.a1, cfg_.conv1, s1, s1, dP1);
        std::vector<double> dZ1 = nn::relu_backward(f.z1, dA1);
        conv1_.backward(f.planes, s1, s1, dZ1);
    }

    std::vector<nn::Param*> params() {
        std::vector<nn::Param*> ps = {&conv1_.W, &conv1_.b, &conv2_.W, &conv2_.b, &conv3_.W, &conv3_.b};
        for (nn::Dense& d : fc_) {
            ps.push_back(&d.W);
            ps.push_back(&d.b);
        }
        for (nn::Dense* d : {&shared_, &action_, &value_}) {
            ps.push_back(&d->W);
            ps.push_back(&d->b);
        }
        return ps;
    }

    nn::Json to_json() const {
        nn::Json j;
        j["version"] = 1;
        j["kind"] = "puzzle-policy";
        j["domain"] = to_string(dom_);
        j["channels"] = puzzle_channel_names(dom_);
        j["canvas"] = cfg_.canvas;
        j["conv"] = {cfg_.conv1, cfg_.conv2, cfg_.conv3};
        j["fc"] = cfg_.fc;
        j["shared"] = cfg_.shared;
        j["tensors"] = nn::params_to_json(named(const_cast<PuzzlePolicyNet&>(*this)));
        return j;
    }

    static PuzzlePolicyNet from_json(const nn::Json& j) {
        if (!j.is_object() || j.value("kind", std::string()) != "puzzle-policy")
            throw CheckpointError("not a puzzle policy checkpoint");
        if (j.value("version", 0) != 1) throw CheckpointError("unsupported puzzle policy version");
        Domain dom = Domain::HoCMaze;
        PuzzleNetConfig cfg;
        std::vector<std::string> channels;
        try {
            dom = domain_from_string(j.at("domain").get<std::string>());
            channels = j.at("channels").get<std::vector<std::string>>();
            cfg.canvas = j.at("canvas").get<int>();
            cfg.conv1 = j.at("conv").at(0).get<int>();
            cfg.conv2 = j.at("conv").at(1).get<int>();
            cfg.conv3 = j.at("conv").at(2).get<int>();
            cfg.fc = j.at("fc").get<std::array<int, 5>>();
            cfg.shared = j.at("shared").get<int>();
        } catch (const nn::Json::exception& e) {
            throw CheckpointError(e.what());
        } catch (const DomainError& e) {
            throw CheckpointError(e.what());
        }
        if (channels != puzzle_channel_names(dom))
            throw CheckpointError("grid channel layout does not match this build");
        PuzzlePolicyNet net(dom, cfg, 0);
        auto named = PuzzlePolicyNet::named(net);
        std::vector<std::pair<std::string, nn::Param*>> mut;
        mut.reserve(named.size());
        for (auto& [name, p] : named) mut.emplace_back(name, const_cast<nn::Param*>(p));
        nn::params_from_json(j.at("tensors"), mut);
        return net;
    }

  private:
    static std::vector<std::pair<std::string, const nn::Param*>> named(PuzzlePolicyNet& n) {
        std::vector<std::pair<std::string, const nn::Param*>> out = {
            {"conv1-weight", &n.conv1_.W}, {"conv1-bias", &n.conv1_.b},
            {"conv2-weight", &n.conv2_.W}, {"conv2-bias", &n.conv2_.b},
            {"conv3-weight", &n.conv3_.W}, {"conv3-bias", &n.conv3_.b}};
        for (std::size_t i = 0; i < n.fc_.size(); ++i) {
            out.emplace_back("fc" + std::to_string(i) + "-weight", &n.fc_[i].W);
            out.emplace_back("fc" + std::to_string(i) + "-bias", &n.fc_[i].b);
        }
        out.emplace_back("shared-weight", &n.shared_.W);
        out.emplace_back("shared-bias", &n.shared_.b);
        out.emplace_back("action-weight", &n.action_.W);
        out.emplace_back("action-bias", &n.action_.b);
        out.emplace_back("value-weight", &n.value_.W);
        out.emplace_back("value-bias", &n.value_.b);
        return out;
    }

    Domain dom_;
    PuzzleNetConfig cfg_;
    nn::Conv3x3 conv1_, conv2_, conv3_;
    std::array<nn::Dense, 5> fc_;
    nn::Dense shared_, action_, value_;
};

/// Samples from a flattened (tau > 1) or sharpened (tau < 1) version of the
/// wrapped policy's distribution; values pass through.
class TemperaturePolicy final : public PuzzlePolicy {
  public:
    TemperaturePolicy(PuzzlePolicy& inner, double tau) : inner_(inner), tau_(tau) {
        if (tau <= 0.0) throw std::invalid_argument("temperature must be positive");
    }

    std::vector<double> logits(const SymState& s) override {
        std::vector<double> lg = inner_.logits(s);
        for (double& v : lg) v /= tau_;
        return lg;
    }

    double value(const SymState& s) override { return inner_.value(s); }

  private:
    PuzzlePolicy& inner_;
    double tau_;
};

// ---------------------------------------------------------------------------
// Actor-critic training
// ---------------------------------------------------------------------------

struct PuzzleTrainItem {
    Ast code;
    TaskSpec spec;
};

struct TrainPuzzleConfig {
    int episodes = 1000;
    int buffer = 10;  ///< episodes per gradient update
    nn::AdamConfig adam;
    double clipNorm = 5.0;
    double temperature = 1.0;     ///< sampling temperature during training
    double gateFrom = 0.8;        ///< oracle-ratio reward gate at ramp start
    double gateTo = 0.9;          ///< gate at the final episode
    double gateStartFrac = 0.3;   ///< fraction of episodes trained before the gate turns on
    int oracleRollouts = 200;     ///< uniform rollouts for each code's score estimate
    std::uint64_t seed = 0;
    ExecConfig exec;
};

struct TrainPuzzleReport {
    std::vector<double> episodeReward;  ///< gated terminal reward, generation order
    std::vector<double> rawScore;       ///< task score before gating
    std::vector<double> oracleScore;    ///< per training code
};

/// Episodic policy-gradient training with a learned value baseline. The
/// terminal task score is the only reward; later episodes must additionally
/// beat a rising fraction of the per-code oracle score to count.
inline TrainPuzzleReport train_puzzle_policy(PuzzlePolicyNet& net,
                                             const std::vector<PuzzleTrainItem>& items,
                                             const TrainPuzzleConfig& cfg = {}) {
    if (items.empty()) throw NoValidCodes("puzzle policy training needs at least one code");
    for (const PuzzleTrainItem& it : items)
        if (it.spec.domain != net.domain()) throw DomainError("training item domain mismatch");

    TrainPuzzleReport rep;
    rep.oracleScore.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        rep.oracleScore.push_back(
            task_oracle(items[i].code, items[i].spec, cfg.oracleRollouts,
                        derive_seed(cfg.seed, 0x0A11 + i), cfg.exec)
                .score);

    nn::Adam opt(net.params(), cfg.adam);
    TemperaturePolicy sampler(net, cfg.temperature);

    struct Rollout {
        std::vector<SymStep> steps;
        double ret = 0.0;
    };
    std::vector<Rollout> buffer;

    auto flush = [&]() {
        if (buffer.empty()) return;
        for (const Rollout& ro : buffer) {
            for (const SymStep& st : ro.steps) {
                const PuzzlePolicyNet::Forward f = net.forward_full(st.state);
                const nn::LossGrad lp = nn::masked_log_prob(f.logits, st.state.legal, st.action);
                const double advantage = ro.ret - f.value;
                std::vector<double> dlogits(lp.dlogits.size());
                for (std::size_t i = 0; i < dlogits.size(); ++i) dlogits[i] = -advantage * lp.dlogits[i];
                const double dvalue = nn::smooth_l1(f.value, ro.ret).second;
                net.backward(f, dlogits, dvalue);
            }
        }
        nn::scale_grads(net.params(), 1.0 / static_cast<double>(buffer.size()));
        nn::clip_grad_norm(net.params(), cfg.clipNorm);
        opt.step();
        buffer.clear();
    };

    for (int e = 0; e < cfg.episodes; ++e) {
        const std::size_t idx = static_cast<std::size_t>(e) % items.size();
        Rng rng(derive_seed(cfg.seed, 0xE000000ULL + static_cast<std::uint64_t>(e)));
        SymEpisode ep = generate_puzzle(items[idx].code, items[idx].spec, sampler, rng, cfg.exec);
        const double raw = ep.success ? ep.reward : 0.0;
        double gated = raw;
        const double frac = cfg.episodes > 1 ? static_cast<double>(e) / (cfg.episodes - 1) : 1.0;
        if (frac >= cfg.gateStartFrac) {
            const double ramp = cfg.gateStartFrac < 1.0
                                    ? (frac - cfg.gateStartFrac) / (1.0 - cfg.gateStartFrac)
                                    : 1.0;
            const double lambda = cfg.gateFrom + (cfg.gateTo - cfg.gateFrom) * ramp;
            if (!(raw > lambda * rep.oracleScore[idx])) gated = 0.0;
        }
        rep.rawScore.push_back(raw);
        rep.episodeReward.push_back(gated);
        if (!ep.steps.empty()) {
            buffer.push_back({std::move(ep.steps), gated});
            if (static_cast<int>(buffer.size()) >= cfg.buffer) flush();
        }
    }
    flush();
    return rep;
}

// ---------------------------------------------------------------------------
// Checkpoint files
// ---------------------------------------------------------------------------

inline void save_code_policy(const CodePolicyNet& net, const std::string& path) {
    write_json_file(path, net.to_json());
}

inline CodePolicyNet load_code_policy(const std::string& path) {
    try {
        return CodePolicyNet::from_json(read_json_file(path));
    } catch (const CheckpointError&) {
        throw;
    } catch (const FormatError& e) {
        throw CheckpointError(e.what());
    }
}

inline void save_puzzle_policy(const PuzzlePolicyNet& net, const std::string& path) {
    write_json_file(path, net.to_json());
}

inline PuzzlePolicyNet load_puzzle_policy(const std::string& path) {
    try {
        return PuzzlePolicyNet::from_json(read_json_file(path));
    } catch (const CheckpointError&) {
        throw;
    } catch (const FormatError& e) {
        throw CheckpointError(e.what());
    }
}

}  // namespace taskgen
