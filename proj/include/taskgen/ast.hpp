#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "taskgen/dsl.hpp"
#include "taskgen/errors.hpp"

namespace taskgen {

/// One block of a program tree. The same node type also represents sketch
/// skeletons: `hole == true` marks an action-sequence hole, `cond == nullopt`
/// on a conditional/While marks a masked condition slot, and `iter == 0` on a
/// Repeat marks a masked iterator slot.
struct AstNode {
    TokenKind kind = TokenKind::Run;
    bool hole = false;
    std::optional<Condition> cond;
    int iter = 0;
    std::vector<AstNode> body;
    std::vector<AstNode> elseBody;

    bool operator==(const AstNode& o) const {
        return kind == o.kind && hole == o.hole && cond == o.cond && iter == o.iter && body == o.body &&
               elseBody == o.elseBody;
    }
};

inline AstNode make_action(TokenKind k) {
    AstNode n;
    n.kind = k;
    return n;
}

inline AstNode make_action_hole() {
    AstNode n;
    n.hole = true;
    return n;
}

/// A program. `root` is always the Run block.
struct Ast {
    Domain domain = Domain::HoCMaze;
    AstNode root;

    bool operator==(const Ast& o) const { return domain == o.domain && root == o.root; }
};

inline bool has_hole(const AstNode& n) {
    if (n.hole) return true;
    if (is_construct(n.kind) && n.kind != TokenKind::RepeatUntil) {
        if (n.kind == TokenKind::Repeat) {
            if (n.iter == 0) return true;
        } else if (!n.cond.has_value()) {
            return true;
        }
    }
    for (const AstNode& c : n.body)
        if (has_hole(c)) return true;
    for (const AstNode& c : n.elseBody)
        if (has_hole(c)) return true;
    return false;
}

inline bool has_hole(const Ast& a) { return has_hole(a.root); }

inline bool is_complete(const Ast& a) { return !has_hole(a.root); }

namespace detail {

inline void validate_node(Domain d, const AstNode& n, bool allowHoles, bool topLevel) {
    if (n.hole) {
        if (!allowHoles) throw DomainError("hole in a complete program");
        if (!n.body.empty() || !n.elseBody.empty() || n.cond.has_value() || n.iter != 0)
            throw DomainError("malformed hole node");
        return;
    }
    if (n.kind == TokenKind::Run) throw DomainError("nested Run block");
    if (!domain_allows(d, n.kind)) throw DomainError(to_string(n.kind) + " is not in the " + to_string(d) + " DSL");
    if (is_action(n.kind)) {
        if (!n.body.empty() || !n.elseBody.empty() || n.cond.has_value() || n.iter != 0)
            throw DomainError("action block with children");
        return;
    }
    switch (n.kind) {
        case TokenKind::Repeat:
            if (n.cond.has_value()) throw DomainError("Repeat with condition");
            if (n.iter == 0) {
                if (!allowHoles) throw DomainError("Repeat without iterator");
            } else if (n.iter < kMinIterator || n.iter > kMaxIterator) {
                throw DomainError("Repeat iterator out of range");
            }
            break;
        case TokenKind::RepeatUntil:
            if (!topLevel) throw DomainError("RepeatUntil must be a top-level block");
            if (n.cond.has_value() || n.iter != 0) throw DomainError("RepeatUntil carries no condition slot");
            break;
        case TokenKind::While:
        case TokenKind::If:
        case TokenKind::IfElse:
            if (n.iter != 0) throw DomainError(to_string(n.kind) + " with iterator");
            if (n.cond.has_value()) {
                if (!domain_allows(d, *n.cond))
                    throw DomainError(to_string(*n.cond) + " is not in the " + to_string(d) + " DSL");
            } else if (!allowHoles) {
                throw DomainError(to_string(n.kind) + " without condition");
            }
            break;
        default: break;
    }
    if (n.kind != TokenKind::IfElse && !n.elseBody.empty()) throw DomainError("else branch outside IfElse");
    for (const AstNode& c : n.body) validate_node(d, c, allowHoles, false);
    for (const AstNode& c : n.elseBody) validate_node(d, c, allowHoles, false);
}

}  // namespace detail

/// Checks well-formedness against the domain grammar. RepeatUntil is allowed
/// only in HoCMaze, only at top level, at most once, and only as the final
/// top-level block. Empty bodies are representable everywhere.
inline void validate(const Ast& a, bool allowHoles = false) {
    if (a.root.kind != TokenKind::Run) throw DomainError("program root must be Run");
    if (a.root.cond.has_value() || a.root.iter != 0 || !a.root.elseBody.empty() || a.root.hole)
        throw DomainError("malformed Run block");
    int repeatUntilCount = 0;
    for (std::size_t i = 0; i < a.root.body.size(); ++i) {
        if (!a.root.body[i].hole && a.root.body[i].kind == TokenKind::RepeatUntil) {
            ++repeatUntilCount;
            bool trailing = true;
            for (std::size_t j = i + 1; j < a.root.body.size(); ++j)
                if (!a.root.body[j].hole) trailing = false;
            if (!trailing) throw DomainError("RepeatUntil must be the final top-level block");
        }
    }
    if (repeatUntilCount > 1) throw DomainError("more than one RepeatUntil");
    for (const AstNode& c : a.root.body) detail::validate_node(a.domain, c, allowHoles, true);
}

// ---------------------------------------------------------------------------
// Attributes
// ---------------------------------------------------------------------------

struct CodeAttributes {
    std::set<TokenKind> blocks;  ///< distinct block kinds used, Run excluded
    int nblock = 0;              ///< total block count, Run included
    std::string structSig;       ///< construct skeleton, e.g. "{Run{RepeatUntil{IfElse}}}"
    int depth = 0;
    int nconst = 0;              ///< number of construct blocks
};

namespace detail {

// Deepest construct-nesting chain at or below `n` (n itself included when it
// is a construct).
inline int construct_chain(const AstNode& n) {
    int sub = 0;
    for (const AstNode& c : n.body) sub = std::max(sub, construct_chain(c));
    for (const AstNode& c : n.elseBody) sub = std::max(sub, construct_chain(c));
    return (!n.hole && is_construct(n.kind)) ? 1 + sub : sub;
}

inline bool any_block(const AstNode& n) {
    for (const AstNode& c : n.body)
        if (!c.hole || any_block(c)) return true;
    for (const AstNode& c : n.elseBody)
        if (!c.hole || any_block(c)) return true;
    return false;
}

inline void collect_attrs(const AstNode& n, CodeAttributes& out) {
    if (n.hole) return;
    if (n.kind != TokenKind::Run) {
        out.blocks.insert(n.kind);
        out.nblock += 1;
        if (is_construct(n.kind)) out.nconst += 1;
    }
    for (const AstNode& c : n.body) collect_attrs(c, out);
    for (const AstNode& c : n.elseBody) collect_attrs(c, out);
}

inline void struct_sig(const AstNode& n, std::string& out) {
    std::string inner;
    bool first = true;
    auto walk = [&](const std::vector<AstNode>& children) {
        for (const AstNode& c : children) {
            if (c.hole || !is_construct(c.kind)) continue;
            std::string s;
            struct_sig(c, s);
            if (!first) inner += "; ";
            inner += s;
            first = false;
        }
    };
    walk(n.body);
    walk(n.elseBody);
    out = to_string(n.kind == TokenKind::Run ? TokenKind::Run : n.kind);
    if (!inner.empty()) out += "{" + inner + "}";
}

}  // namespace detail

/// Program depth. Run counts as level 1 and every nested construct adds one
/// level; a program whose deepest path is a bare action still has depth 2,
/// and the empty program has depth 1.
inline int code_depth(const Ast& a) {
    const int chain = detail::construct_chain(a.root);
    if (chain > 0) return 1 + chain;
    return detail::any_block(a.root) ? 2 : 1;
}

/// Depth of the construct skeleton alone (holes and actions ignored):
/// the empty skeleton {Run} has depth 1, {Run{Repeat}} has 2, and so on.
inline int struct_depth(const Ast& a) { return 1 + detail::construct_chain(a.root); }

inline CodeAttributes attributes(const Ast& a) {
    CodeAttributes out;
    out.nblock = 1;  // Run
    detail::collect_attrs(a.root, out);
    std::string sig;
    detail::struct_sig(a.root, sig);
    out.structSig = "{" + sig + "}";
    out.depth = code_depth(a);
    return out;
}

// ---------------------------------------------------------------------------
// Node ids
// ---------------------------------------------------------------------------

/// Assigns stable ids to blocks in preorder (Run = 0; holes are skipped) and
/// returns pointers indexed by id.
inline std::vector<const AstNode*> preorder_blocks(const Ast& a) {
    std::vector<const AstNode*> out;
    auto walk = [&](auto&& self, const AstNode& n) -> void {
        if (n.hole) return;
        out.push_back(&n);
        for (const AstNode& c : n.body) self(self, c);
        for (const AstNode& c : n.elseBody) self(self, c);
    };
    walk(walk, a.root);
    return out;
}

inline int count_nodes(const Ast& a) { return static_cast<int>(preorder_blocks(a).size()); }

}  // namespace taskgen
