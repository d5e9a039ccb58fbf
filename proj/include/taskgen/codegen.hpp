#pragma once

#include <cmath>
#include <functional>

#include "taskgen/rng.hpp"
#include "taskgen/sketch.hpp"

namespace taskgen {

/// One open choice while completing a sketch. `legal` lists the dictionary
/// indices that survive grammar, allowed-set, and budget masking; for action
/// choices the end-of-body token comes first, then actions in dictionary
/// order.
struct DecisionPoint {
    enum class Kind : std::uint8_t { NextToken, BoolChoice, IterChoice, EndBody };
    Kind kind = Kind::NextToken;
    int budget = 0;            ///< actions still placeable under the size cap
    int depth = 0;             ///< construct nesting depth, program body = 0
    TokenKind encl = TokenKind::Run;  ///< innermost enclosing construct
    bool inElse = false;       ///< inside the else branch of the enclosing IfElse
    std::vector<int> legal;
};

/// Sequential decision policy for code completion. The engine feeds every
/// token of the linearized code through observe(), in order, together with
/// the action budget still open at that moment, and asks for logits over the
/// full dictionary at each open decision.
class CodegenPolicy {
  public:
    virtual ~CodegenPolicy() = default;
    virtual void reset(const TaskSpec&) {}
    virtual void observe(int /*dictToken*/, int /*budget*/) {}
    virtual std::vector<double> logits(const DecisionPoint&) = 0;
};

/// Zero logits everywhere: uniform over the legal set.
class UniformCodePolicy final : public CodegenPolicy {
  public:
    std::vector<double> logits(const DecisionPoint&) override { return std::vector<double>(dict::kSize, 0.0); }
};

namespace detail {

inline TokenKind action_of_dict(int t) {
    switch (t) {
        case 3: return TokenKind::Move;
        case 4: return TokenKind::TurnLeft;
        case 5: return TokenKind::TurnRight;
        case 6: return TokenKind::PutMarker;
        case 7: return TokenKind::PickMarker;
        default: throw IllegalDecision("dict index " + std::to_string(t) + " is not an action");
    }
}

inline Condition condition_of_dict(int t) {
    if (t < 15 || t > 20) throw IllegalDecision("dict index " + std::to_string(t) + " is not a condition");
    return static_cast<Condition>(t - 15);
}

inline int iter_of_dict(int t) {
    if (t < dict::kIter2 || t >= dict::kSize) throw IllegalDecision("dict index " + std::to_string(t) + " is not an iterator");
    return t - dict::kIter2 + 2;
}

struct CompletionEngine {
    const TaskSpec& spec;
    const std::function<int(const DecisionPoint&)>& choose;
    const std::function<void(int, int)>& observe;
    int placed = 0;  ///< blocks committed so far (fixed blocks counted up front)

    void emit(int tok) {
        if (observe) observe(tok, spec.size - placed);
    }

    int decide(DecisionPoint d) {
        if (d.legal.empty()) throw DeadEnd("masking removed every choice");
        const int pick = choose(d);
        bool ok = false;
        for (int t : d.legal) ok = ok || t == pick;
        if (!ok) throw IllegalDecision("choice " + std::to_string(pick) + " not in the legal set");
        emit(pick);
        return pick;
    }

    /// Action-sequence hole: append sampled actions until end-of-body.
    void fill_hole(std::vector<AstNode>& out, int depth, TokenKind encl, bool inElse, bool mustPlaceOne) {
        bool placedHere = false;
        for (;;) {
            DecisionPoint d;
            d.kind = DecisionPoint::Kind::NextToken;
            d.budget = spec.size - placed;
            d.depth = depth;
            d.encl = encl;
            d.inElse = inElse;
            if (!(mustPlaceOne && !placedHere)) d.legal.push_back(dict::kEnd);
            if (d.budget >= 1)
                for (TokenKind a : domain_actions(spec.domain))
                    if (spec.delta.actions.count(a)) d.legal.push_back(dict::of_token(a));
            const int pick = decide(d);
            if (pick == dict::kEnd) return;
            out.push_back(make_action(action_of_dict(pick)));
            ++placed;
            placedHere = true;
        }
    }

    void fill_slots(AstNode& c) {
        if (c.kind == TokenKind::Repeat) {
            if (c.iter == 0) {
                DecisionPoint d;
                d.kind = DecisionPoint::Kind::IterChoice;
                d.budget = spec.size - placed;
                for (int it = kMinIterator; it <= kMaxIterator; ++it)
                    if (spec.delta.iterators.count(it)) d.legal.push_back(dict::of_iterator(it));
                c.iter = iter_of_dict(decide(d));
            } else {
                emit(dict::of_iterator(c.iter));
            }
            return;
        }
        if (c.kind == TokenKind::RepeatUntil) return;
        if (!c.cond.has_value()) {
            DecisionPoint d;
            d.kind = DecisionPoint::Kind::BoolChoice;
            d.budget = spec.size - placed;
            for (Condition b : domain_conditions(spec.domain))
                if (spec.delta.booleans.count(b)) d.legal.push_back(dict::of_condition(b));
            c.cond = condition_of_dict(decide(d));
        } else {
            emit(dict::of_condition(*c.cond));
        }
    }

    /// Whether any element of `body` at or after `from` is a fixed block.
    static bool fixed_block_later(const std::vector<AstNode>& body, std::size_t from) {
        for (std::size_t i = from; i < body.size(); ++i)
            if (!body[i].hole) return true;
        return false;
    }

    static bool hole_later(const std::vector<AstNode>& body, std::size_t from) {
        for (std::size_t i = from; i < body.size(); ++i)
            if (body[i].hole) return true;
        return false;
    }

    void walk_body(const std::vector<AstNode>& in, std::vector<AstNode>& out, int depth, TokenKind encl,
                   bool inElse, bool topLevel, bool& bodyHasBlock) {
        for (std::size_t i = 0; i < in.size(); ++i) {
            const AstNode& el = in[i];
            if (el.hole) {
                // The program body must not end up empty: the last chance to
                // place a block forces an action.
                const bool mustPlaceOne = topLevel && !bodyHasBlock && !fixed_block_later(in, i + 1) &&
                                          !hole_later(in, i + 1);
                const std::size_t before = out.size();
                fill_hole(out, depth, encl, inElse, mustPlaceOne);
                if (out.size() > before) bodyHasBlock = true;
                continue;
            }
            if (is_action(el.kind)) {
                out.push_back(el);
                emit(dict::of_token(el.kind));
                bodyHasBlock = true;
                continue;
            }
            AstNode c;
            c.kind = el.kind;
            c.cond = el.cond;
            c.iter = el.iter;
            emit(dict::of_token(c.kind));
            fill_slots(c);
            bool sub = false;
            walk_body(el.body, c.body, depth + 1, c.kind, false, false, sub);
            if (el.body.empty() || !el.body.back().hole) emit(dict::kEnd);
            if (c.kind == TokenKind::IfElse) {
                emit(dict::kElse);
                bool sub2 = false;
                walk_body(el.elseBody, c.elseBody, depth + 1, c.kind, true, false, sub2);
                if (el.elseBody.empty() || !el.elseBody.back().hole) emit(dict::kEnd);
            }
            out.push_back(std::move(c));
            bodyHasBlock = true;
        }
    }

    Ast run() {
        validate(spec.sketch, true);
        placed = 1;  // Run
        for (const AstNode* c : constructs_of(spec.sketch)) {
            (void)c;
            ++placed;
        }
        // fixed actions already present in the sketch
        std::function<void(const AstNode&)> countActions = [&](const AstNode& n) {
            for (const AstNode& ch : n.body) {
                if (!ch.hole && is_action(ch.kind)) ++placed;
                countActions(ch);
            }
            for (const AstNode& ch : n.elseBody) {
                if (!ch.hole && is_action(ch.kind)) ++placed;
                countActions(ch);
            }
        };
        countActions(spec.sketch.root);
        if (placed > spec.size) throw DeadEnd("sketch minimum exceeds the size cap");

        Ast out;
        out.domain = spec.domain;
        out.root.kind = TokenKind::Run;
        emit(dict::kRun);
        bool hasBlock = false;
        walk_body(spec.sketch.root.body, out.root.body, 0, TokenKind::Run, false, true, hasBlock);
        if (spec.sketch.root.body.empty() || !spec.sketch.root.body.back().hole) emit(dict::kEnd);
        validate(out, false);
        return out;
    }
};

}  // namespace detail

/// Completes a sketch by querying `choose` at every open decision. `observe`
/// (optional) receives the full token stream of the resulting code in
/// traversal order, chosen tokens included, with the open action budget at
/// the time of each token.
inline Ast complete_sketch(const TaskSpec& spec, const std::function<int(const DecisionPoint&)>& choose,
                           const std::function<void(int, int)>& observe = {}) {
    detail::CompletionEngine eng{spec, choose, observe};
    return eng.run();
}

/// Samples one concrete code from the spec under the policy's (masked)
/// softmax distribution.
inline Ast generate_code(const TaskSpec& spec, CodegenPolicy& policy, Rng& rng) {
    policy.reset(spec);
    return complete_sketch(
        spec,
        [&](const DecisionPoint& d) {
            const std::vector<double> lg = policy.logits(d);
            double mx = lg[static_cast<std::size_t>(d.legal[0])];
            for (int t : d.legal) mx = std::max(mx, lg[static_cast<std::size_t>(t)]);
            std::vector<double> w;
            w.reserve(d.legal.size());
            for (int t : d.legal) w.push_back(std::exp(lg[static_cast<std::size_t>(t)] - mx));
            return d.legal[static_cast<std::size_t>(rng.next_categorical(w))];
        },
        [&](int tok, int budget) { policy.observe(tok, budget); });
}

inline Ast generate_code_uniform(const TaskSpec& spec, Rng& rng) {
    UniformCodePolicy p;
    return generate_code(spec, p, rng);
}

enum class EnumOutcome : std::uint8_t { Exhausted, Stopped, Budget };

/// Visits every completion of the spec in deterministic order (end-of-body
/// before actions, otherwise dictionary order). The visitor returns false to
/// stop early. `nodeCap` bounds the number of partial traversals.
inline EnumOutcome for_each_completion(const TaskSpec& spec, long long nodeCap,
                                       const std::function<bool(const Ast&)>& visit) {
    struct Sentinel {};
    std::vector<std::vector<int>> alts;  // legal sets discovered along the prefix
    std::vector<std::size_t> cursor;     // chosen alternative per level
    long long probes = 0;

    auto probe = [&](Ast& outCode, std::vector<int>& outLegal) -> bool {
        std::size_t idx = 0;
        try {
            outCode = complete_sketch(spec, [&](const DecisionPoint& d) -> int {
                if (idx < cursor.size()) {
                    const int t = alts[idx][cursor[idx]];
                    ++idx;
                    return t;
                }
                outLegal = d.legal;
                throw Sentinel{};
            });
            return true;
        } catch (const Sentinel&) {
            return false;
        }
    };

    for (;;) {
        if (++probes > nodeCap) return EnumOutcome::Budget;
        Ast code;
        std::vector<int> legal;
        if (probe(code, legal)) {
            if (!visit(code)) return EnumOutcome::Stopped;
            // backtrack to the next unexplored alternative
            while (!cursor.empty()) {
                if (++cursor.back() < alts.back().size()) break;
                cursor.pop_back();
                alts.pop_back();
            }
            if (cursor.empty()) return EnumOutcome::Exhausted;
        } else {
            alts.push_back(std::move(legal));
            cursor.push_back(0);
        }
    }
}

/// First `maxCount` completions; throws BudgetExceeded when the search budget
/// runs out before the space is covered.
inline std::vector<Ast> enumerate_codes(const TaskSpec& spec, long long maxCount, long long nodeCap = 10000000) {
    std::vector<Ast> out;
    if (maxCount <= 0) return out;
    const EnumOutcome oc = for_each_completion(spec, nodeCap, [&](const Ast& a) {
        out.push_back(a);
        return static_cast<long long>(out.size()) < maxCount;
    });
    if (oc == EnumOutcome::Budget) throw BudgetExceeded("completion enumeration node cap");
    return out;
}

// ---------------------------------------------------------------------------
// Construct-skeleton enumeration
// ---------------------------------------------------------------------------

namespace detail {

/// Ordered forests of construct trees with exactly `k` constructs.
inline std::vector<std::vector<AstNode>> construct_forests(int k, const std::vector<TokenKind>& kinds) {
    std::vector<std::vector<AstNode>> out;
    if (k == 0) {
        out.push_back({});
        return out;
    }
    for (TokenKind kind : kinds) {
        if (kind == TokenKind::RepeatUntil) continue;  // top-level trailing only
        if (kind == TokenKind::IfElse) {
            for (int inThen = 0; inThen + 1 <= k; ++inThen)
                for (int inElse = 0; inThen + inElse + 1 <= k; ++inElse)
                    for (auto& thenB : construct_forests(inThen, kinds))
                        for (auto& elseB : construct_forests(inElse, kinds))
                            for (auto& rest : construct_forests(k - 1 - inThen - inElse, kinds)) {
                                AstNode n;
                                n.kind = kind;
                                n.body = thenB;
                                n.elseBody = elseB;
                                std::vector<AstNode> f;
                                f.push_back(std::move(n));
                                for (auto& r : rest) f.push_back(r);
                                out.push_back(std::move(f));
                            }
            continue;
        }
        for (int inside = 0; inside + 1 <= k; ++inside)
            for (auto& body : construct_forests(inside, kinds))
                for (auto& rest : construct_forests(k - 1 - inside, kinds)) {
                    AstNode n;
                    n.kind = kind;
                    n.body = body;
                    std::vector<AstNode> f;
                    f.push_back(std::move(n));
                    for (auto& r : rest) f.push_back(r);
                    out.push_back(std::move(f));
                }
    }
    return out;
}

inline void insert_hole_alternation(AstNode& n) {
    std::vector<AstNode> body;
    body.push_back(make_action_hole());
    for (AstNode& c : n.body) {
        insert_hole_alternation(c);
        body.push_back(std::move(c));
        body.push_back(make_action_hole());
    }
    n.body = std::move(body);
    if (n.kind == TokenKind::IfElse) {
        std::vector<AstNode> els;
        els.push_back(make_action_hole());
        for (AstNode& c : n.elseBody) {
            insert_hole_alternation(c);
            els.push_back(std::move(c));
            els.push_back(make_action_hole());
        }
        n.elseBody = std::move(els);
    }
}

}  // namespace detail

/// Every construct skeleton (as an all-hole sketch) with up to `maxConstructs`
/// constructs drawn from `kinds`, smallest skeletons first. HoCMaze skeletons
/// may end in one top-level RepeatUntil.
inline std::vector<Ast> enumerate_structures(Domain d, const std::set<TokenKind>& kinds, int maxConstructs) {
    std::vector<TokenKind> ks;
    for (TokenKind k : domain_constructs(d))
        if (kinds.count(k)) ks.push_back(k);
    const bool withRu = d == Domain::HoCMaze && kinds.count(TokenKind::RepeatUntil) > 0;
    std::vector<Ast> out;
    for (int k = 0; k <= maxConstructs; ++k) {
        std::vector<std::vector<AstNode>> tops;
        for (auto& f : detail::construct_forests(k, ks)) tops.push_back(std::move(f));
        if (withRu && k >= 1)
            for (int inside = 0; inside + 1 <= k; ++inside)
                for (auto& body : detail::construct_forests(inside, ks))
                    for (auto& lead : detail::construct_forests(k - 1 - inside, ks)) {
                        AstNode ru;
                        ru.kind = TokenKind::RepeatUntil;
                        ru.body = body;
                        std::vector<AstNode> f = lead;
                        f.push_back(std::move(ru));
                        tops.push_back(std::move(f));
                    }
        for (auto& top : tops) {
            Ast sk;
            sk.domain = d;
            sk.root.kind = TokenKind::Run;
            std::vector<AstNode> body;
            body.push_back(make_action_hole());
            const std::size_t n = top.size();
            for (std::size_t i = 0; i < n; ++i) {
                const bool trailingRu = top[i].kind == TokenKind::RepeatUntil;
                detail::insert_hole_alternation(top[i]);
                body.push_back(std::move(top[i]));
                if (!trailingRu) body.push_back(make_action_hole());
            }
            sk.root.body = std::move(body);
            validate(sk, true);
            out.push_back(std::move(sk));
        }
    }
    return out;
}

}  // namespace taskgen
