#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "taskgen/ast.hpp"

namespace taskgen {

namespace detail {

struct Lexer {
    std::string text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ';')) ++pos;
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    char peek_char() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    /// Next token: identifier (letters, digits, '-'), number, or punctuation.
    std::string next() {
        skip_ws();
        if (pos >= text.size()) throw SyntaxError("unexpected end of input");
        char c = text[pos];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < text.size()) {
                char d = text[pos];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '-') ++pos;
                else break;
            }
            return text.substr(start, pos - start);
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            return text.substr(start, pos - start);
        }
        ++pos;
        return std::string(1, c);
    }

    void expect(const std::string& tok) {
        std::string got = next();
        if (got != tok) throw SyntaxError("expected '" + tok + "', got '" + got + "'");
    }
};

struct Parser {
    Lexer lex;
    bool allowHoles = false;

    std::vector<AstNode> parse_body() {
        lex.expect("{");
        std::vector<AstNode> body;
        while (lex.peek_char() != '}') body.push_back(parse_stmt());
        lex.expect("}");
        return body;
    }

    AstNode parse_stmt() {
        std::string tok = lex.next();
        if (tok == "move") return make_action(TokenKind::Move);
        if (tok == "turnLeft") return make_action(TokenKind::TurnLeft);
        if (tok == "turnRight") return make_action(TokenKind::TurnRight);
        if (tok == "putMarker") return make_action(TokenKind::PutMarker);
        if (tok == "pickMarker") return make_action(TokenKind::PickMarker);
        if (tok == "a") {
            if (!allowHoles) throw SyntaxError("hole 'a' outside a sketch");
            return make_action_hole();
        }
        AstNode n;
        if (tok == "Repeat") {
            n.kind = TokenKind::Repeat;
            lex.expect("(");
            std::string it = lex.next();
            if (it == "x") {
                if (!allowHoles) throw SyntaxError("iterator hole 'x' outside a sketch");
                n.iter = 0;
            } else {
                try {
                    n.iter = std::stoi(it);
                } catch (...) {
                    throw SyntaxError("bad Repeat iterator '" + it + "'");
                }
            }
            lex.expect(")");
            n.body = parse_body();
            return n;
        }
        if (tok == "RepeatUntil") {
            n.kind = TokenKind::RepeatUntil;
            lex.expect("(");
            lex.expect("goal");
            lex.expect(")");
            n.body = parse_body();
            return n;
        }
        if (tok == "While" || tok == "If") {
            n.kind = tok == "While" ? TokenKind::While : TokenKind::If;
            lex.expect("(");
            std::string c = lex.next();
            if (c == "b") {
                if (!allowHoles) throw SyntaxError("condition hole 'b' outside a sketch");
            } else {
                n.cond = condition_from_string(c);
            }
            lex.expect(")");
            n.body = parse_body();
            if (n.kind == TokenKind::If && lex.peek_char() == 'E') {
                std::size_t save = lex.pos;
                std::string e = lex.next();
                if (e == "Else") {
                    n.kind = TokenKind::IfElse;
                    n.elseBody = parse_body();
                } else {
                    lex.pos = save;
                }
            }
            return n;
        }
        throw SyntaxError("unexpected token '" + tok + "'");
    }

    Ast parse_program(Domain d) {
        Ast a;
        a.domain = d;
        lex.expect("def");
        lex.expect("Run");
        lex.expect("(");
        lex.expect(")");
        a.root.kind = TokenKind::Run;
        a.root.body = parse_body();
        if (!lex.eof()) throw SyntaxError("trailing input after program");
        return a;
    }
};

inline void print_node(const AstNode& n, std::ostringstream& out, int indent, bool pretty) {
    auto pad = [&] {
        if (pretty)
            for (int i = 0; i < indent; ++i) out << "  ";
    };
    auto open_body = [&](const std::vector<AstNode>& body) {
        out << "{";
        if (pretty) out << "\n";
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (!pretty && i > 0) out << " ";
            print_node(body[i], out, indent + 1, pretty);
        }
        pad();
        out << "}";
    };
    pad();
    if (n.hole) {
        out << "a";
    } else if (is_action(n.kind)) {
        out << to_string(n.kind);
    } else if (n.kind == TokenKind::Repeat) {
        out << "Repeat(";
        if (n.iter == 0) out << "x";
        else out << n.iter;
        out << ")";
        open_body(n.body);
    } else if (n.kind == TokenKind::RepeatUntil) {
        out << "RepeatUntil(goal)";
        open_body(n.body);
    } else {
        out << (n.kind == TokenKind::While ? "While(" : "If(");
        out << (n.cond.has_value() ? to_string(*n.cond) : std::string("b")) << ")";
        open_body(n.body);
        if (n.kind == TokenKind::IfElse) {
            if (pretty) {
                out << "\n";
                pad();
            } else {
                out << " ";
            }
            out << "Else";
            open_body(n.elseBody);
        }
    }
    if (pretty) out << "\n";
}

}  // namespace detail

/// Parses a complete program and validates it against the domain grammar.
inline Ast parse_code(const std::string& text, Domain d) {
    detail::Parser p;
    p.lex.text = text;
    p.allowHoles = false;
    Ast a = p.parse_program(d);
    validate(a, false);
    return a;
}

/// Parses a sketch: like a program, but `a`, `b`, and `x` mark holes.
inline Ast parse_sketch_text(const std::string& text, Domain d) {
    detail::Parser p;
    p.lex.text = text;
    p.allowHoles = true;
    Ast a = p.parse_program(d);
    validate(a, true);
    return a;
}

/// Canonical printer: one block per line, two-space indent. Output parses
/// back to an equal tree.
inline std::string print_code(const Ast& a) {
    std::ostringstream out;
    out << "def Run()";
    out << "{";
    out << "\n";
    for (const AstNode& c : a.root.body) detail::print_node(c, out, 1, true);
    out << "}";
    return out.str();
}

/// Single-line form, used for keys, logs, and CSV cells.
inline std::string print_code_compact(const Ast& a) {
    std::ostringstream out;
    out << "def Run(){";
    for (std::size_t i = 0; i < a.root.body.size(); ++i) {
        if (i > 0) out << " ";
        detail::print_node(a.root.body[i], out, 0, false);
    }
    out << "}";
    return out.str();
}

}  // namespace taskgen
