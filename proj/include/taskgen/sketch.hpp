#pragma once

#include "taskgen/parser.hpp"
#include "taskgen/puzzle.hpp"

namespace taskgen {

/// Kinds of open slots in a sketch.
enum class HoleKind : std::uint8_t { ActionSeq, Bool, Iter };

struct HoleRef {
    HoleKind kind;
    int construct;  ///< preorder construct index owning the slot (-1 for top-level action holes)
};

namespace detail {

inline void collect_constructs(const AstNode& n, std::vector<const AstNode*>& out) {
    for (const AstNode& c : n.body) {
        if (c.hole || !is_construct(c.kind)) continue;
        out.push_back(&c);
        collect_constructs(c, out);
    }
    for (const AstNode& c : n.elseBody) {
        if (c.hole || !is_construct(c.kind)) continue;
        out.push_back(&c);
        collect_constructs(c, out);
    }
}

inline void collect_holes(const AstNode& n, int constructIdx, int& counter, std::vector<HoleRef>& out) {
    if (!n.hole && is_construct(n.kind) && n.kind != TokenKind::Run) {
        if (n.kind == TokenKind::Repeat && n.iter == 0) out.push_back({HoleKind::Iter, constructIdx});
        if ((n.kind == TokenKind::While || n.kind == TokenKind::If || n.kind == TokenKind::IfElse) &&
            !n.cond.has_value())
            out.push_back({HoleKind::Bool, constructIdx});
    }
    auto walk = [&](const std::vector<AstNode>& children) {
        for (const AstNode& c : children) {
            if (c.hole) {
                out.push_back({HoleKind::ActionSeq, constructIdx});
                continue;
            }
            if (is_construct(c.kind)) {
                const int idx = counter++;
                collect_holes(c, idx, counter, out);
            }
        }
    };
    walk(n.body);
    walk(n.elseBody);
}

}  // namespace detail

/// Preorder list of construct nodes (Run excluded); index order defines slot ids.
inline std::vector<const AstNode*> constructs_of(const Ast& a) {
    std::vector<const AstNode*> out;
    detail::collect_constructs(a.root, out);
    return out;
}

/// Open slots of a sketch in traversal order.
inline std::vector<HoleRef> holes_of(const Ast& sketch) {
    std::vector<HoleRef> out;
    int counter = 0;
    detail::collect_holes(sketch.root, -1, counter, out);
    return out;
}

/// Block count of the smallest completion: Run plus every construct kept, all
/// action holes filled empty, except that a program body with nothing else in
/// it must receive at least one action.
inline int min_completion_nblock(const Ast& sketch) {
    const int nconst = static_cast<int>(constructs_of(sketch).size());
    bool runHasBlock = false;
    for (const AstNode& c : sketch.root.body)
        if (!c.hole) runHasBlock = true;
    return 1 + nconst + (runHasBlock ? 0 : 1);
}

namespace detail {

inline std::vector<AstNode> canonical_body(const std::vector<AstNode>& body, const std::set<int>& mask,
                                           int& counter, bool topLevel);

inline AstNode sketch_construct(const AstNode& c, const std::set<int>& mask, int& counter) {
    const int idx = counter++;
    AstNode out;
    out.kind = c.kind;
    const bool masked = mask.count(idx) > 0;
    if (c.kind == TokenKind::Repeat) {
        if (!masked) out.iter = c.iter;
    } else if (c.kind != TokenKind::RepeatUntil) {
        if (!masked) out.cond = c.cond;
    }
    out.body = canonical_body(c.body, mask, counter, false);
    if (c.kind == TokenKind::IfElse) out.elseBody = canonical_body(c.elseBody, mask, counter, false);
    return out;
}

/// Rebuilds a body as the alternation hole, construct, hole, ..., construct,
/// hole. A trailing top-level RepeatUntil admits no hole after it.
inline std::vector<AstNode> canonical_body(const std::vector<AstNode>& body, const std::set<int>& mask,
                                           int& counter, bool topLevel) {
    std::vector<AstNode> out;
    out.push_back(make_action_hole());
    for (const AstNode& c : body) {
        if (!is_construct(c.kind)) continue;
        out.push_back(sketch_construct(c, mask, counter));
        if (!(topLevel && c.kind == TokenKind::RepeatUntil)) out.push_back(make_action_hole());
    }
    return out;
}

}  // namespace detail

/// Strips a code to its sketch: constructs survive, action runs become action
/// holes, and the condition/iterator slots named by `mask` (preorder construct
/// indices) become holes.
inline Ast sketch_of(const Ast& c, const std::set<int>& mask = {}) {
    auto cs = constructs_of(c);
    for (int idx : mask) {
        if (idx < 0 || idx >= static_cast<int>(cs.size())) throw UnknownSlot("no construct " + std::to_string(idx));
        if (cs[static_cast<std::size_t>(idx)]->kind == TokenKind::RepeatUntil)
            throw UnknownSlot("construct " + std::to_string(idx) + " has no open slot");
    }
    Ast out;
    out.domain = c.domain;
    out.root.kind = TokenKind::Run;
    int counter = 0;
    out.root.body = detail::canonical_body(c.root.body, mask, counter, true);
    validate(out, true);
    return out;
}

inline std::string print_sketch(const Ast& sketch) { return print_code_compact(sketch); }

}  // namespace taskgen
