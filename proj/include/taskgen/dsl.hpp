#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "taskgen/errors.hpp"

namespace taskgen {

enum class Domain : std::uint8_t { HoCMaze, Karel };

inline std::string to_string(Domain d) { return d == Domain::HoCMaze ? "hocmaze" : "karel"; }

inline Domain domain_from_string(const std::string& s) {
    if (s == "hocmaze") return Domain::HoCMaze;
    if (s == "karel") return Domain::Karel;
    throw FormatError("unknown domain '" + s + "'");
}

/// Block kinds. Run is the entry block; action blocks are the primitives;
/// the rest are control-flow constructs.
enum class TokenKind : std::uint8_t {
    Run,
    Move,
    TurnLeft,
    TurnRight,
    PutMarker,
    PickMarker,
    Repeat,
    RepeatUntil,
    While,
    If,
    IfElse,
};

inline bool is_action(TokenKind k) {
    return k == TokenKind::Move || k == TokenKind::TurnLeft || k == TokenKind::TurnRight ||
           k == TokenKind::PutMarker || k == TokenKind::PickMarker;
}

inline bool is_construct(TokenKind k) {
    return k == TokenKind::Repeat || k == TokenKind::RepeatUntil || k == TokenKind::While ||
           k == TokenKind::If || k == TokenKind::IfElse;
}

inline bool is_loop(TokenKind k) {
    return k == TokenKind::Repeat || k == TokenKind::RepeatUntil || k == TokenKind::While;
}

inline std::string to_string(TokenKind k) {
    switch (k) {
        case TokenKind::Run: return "Run";
        case TokenKind::Move: return "move";
        case TokenKind::TurnLeft: return "turnLeft";
        case TokenKind::TurnRight: return "turnRight";
        case TokenKind::PutMarker: return "putMarker";
        case TokenKind::PickMarker: return "pickMarker";
        case TokenKind::Repeat: return "Repeat";
        case TokenKind::RepeatUntil: return "RepeatUntil";
        case TokenKind::While: return "While";
        case TokenKind::If: return "If";
        case TokenKind::IfElse: return "IfElse";
    }
    return "?";
}

inline TokenKind token_kind_from_string(const std::string& s) {
    if (s == "Run") return TokenKind::Run;
    if (s == "move") return TokenKind::Move;
    if (s == "turnLeft") return TokenKind::TurnLeft;
    if (s == "turnRight") return TokenKind::TurnRight;
    if (s == "putMarker") return TokenKind::PutMarker;
    if (s == "pickMarker") return TokenKind::PickMarker;
    if (s == "Repeat") return TokenKind::Repeat;
    if (s == "RepeatUntil") return TokenKind::RepeatUntil;
    if (s == "While") return TokenKind::While;
    if (s == "If") return TokenKind::If;
    if (s == "IfElse") return TokenKind::IfElse;
    throw FormatError("unknown block token '" + s + "'");
}

/// Conditions usable in While/If/IfElse. RepeatUntil always tests `goal`
/// and carries no Condition.
enum class Condition : std::uint8_t {
    PathAhead,
    PathLeft,
    PathRight,
    NoPathAhead,
    MarkerPresent,
    NoMarkerPresent,
};

inline std::string to_string(Condition c) {
    switch (c) {
        case Condition::PathAhead: return "pathAhead";
        case Condition::PathLeft: return "pathLeft";
        case Condition::PathRight: return "pathRight";
        case Condition::NoPathAhead: return "no-pathAhead";
        case Condition::MarkerPresent: return "markerPresent";
        case Condition::NoMarkerPresent: return "no-markerPresent";
    }
    return "?";
}

inline Condition condition_from_string(const std::string& s) {
    if (s == "pathAhead") return Condition::PathAhead;
    if (s == "pathLeft") return Condition::PathLeft;
    if (s == "pathRight") return Condition::PathRight;
    if (s == "no-pathAhead") return Condition::NoPathAhead;
    if (s == "markerPresent") return Condition::MarkerPresent;
    if (s == "no-markerPresent") return Condition::NoMarkerPresent;
    throw FormatError("unknown condition '" + s + "'");
}

constexpr int kMinIterator = 2;
constexpr int kMaxIterator = 10;

/// Blocks available in a domain's DSL (excluding Run, which is implicit).
inline const std::vector<TokenKind>& domain_actions(Domain d) {
    static const std::vector<TokenKind> hoc = {TokenKind::Move, TokenKind::TurnLeft, TokenKind::TurnRight};
    static const std::vector<TokenKind> karel = {TokenKind::Move, TokenKind::TurnLeft, TokenKind::TurnRight,
                                                 TokenKind::PutMarker, TokenKind::PickMarker};
    return d == Domain::HoCMaze ? hoc : karel;
}

inline const std::vector<TokenKind>& domain_constructs(Domain d) {
    static const std::vector<TokenKind> hoc = {TokenKind::Repeat, TokenKind::RepeatUntil, TokenKind::If,
                                               TokenKind::IfElse};
    static const std::vector<TokenKind> karel = {TokenKind::Repeat, TokenKind::While, TokenKind::If,
                                                 TokenKind::IfElse};
    return d == Domain::HoCMaze ? hoc : karel;
}

inline const std::vector<Condition>& domain_conditions(Domain d) {
    static const std::vector<Condition> hoc = {Condition::PathAhead, Condition::PathLeft, Condition::PathRight};
    static const std::vector<Condition> karel = {Condition::PathAhead,     Condition::PathLeft,
                                                 Condition::PathRight,     Condition::NoPathAhead,
                                                 Condition::MarkerPresent, Condition::NoMarkerPresent};
    return d == Domain::HoCMaze ? hoc : karel;
}

inline bool domain_allows(Domain d, TokenKind k) {
    if (k == TokenKind::Run) return true;
    for (TokenKind a : domain_actions(d))
        if (a == k) return true;
    for (TokenKind c : domain_constructs(d))
        if (c == k) return true;
    return false;
}

inline bool domain_allows(Domain d, Condition c) {
    for (Condition x : domain_conditions(d))
        if (x == c) return true;
    return false;
}

/// Shared decision-token dictionary used by sequence policies. One fixed
/// table for both domains; per-decision masks select the legal subset.
namespace dict {
constexpr int kPad = 0;
constexpr int kBos = 1;
constexpr int kRun = 2;
constexpr int kMove = 3;
constexpr int kTurnLeft = 4;
constexpr int kTurnRight = 5;
constexpr int kPutMarker = 6;
constexpr int kPickMarker = 7;
constexpr int kRepeat = 8;
constexpr int kRepeatUntil = 9;
constexpr int kWhile = 10;
constexpr int kIf = 11;
constexpr int kIfElse = 12;
constexpr int kElse = 13;
constexpr int kEnd = 14;
constexpr int kPathAhead = 15;
constexpr int kPathLeft = 16;
constexpr int kPathRight = 17;
constexpr int kNoPathAhead = 18;
constexpr int kMarkerPresent = 19;
constexpr int kNoMarkerPresent = 20;
constexpr int kIter2 = 21;  // kIter2 + (x - 2) encodes Repeat(x)
constexpr int kSize = 30;

inline int of_token(TokenKind k) {
    switch (k) {
        case TokenKind::Run: return kRun;
        case TokenKind::Move: return kMove;
        case TokenKind::TurnLeft: return kTurnLeft;
        case TokenKind::TurnRight: return kTurnRight;
        case TokenKind::PutMarker: return kPutMarker;
        case TokenKind::PickMarker: return kPickMarker;
        case TokenKind::Repeat: return kRepeat;
        case TokenKind::RepeatUntil: return kRepeatUntil;
        case TokenKind::While: return kWhile;
        case TokenKind::If: return kIf;
        case TokenKind::IfElse: return kIfElse;
    }
    return kPad;
}

inline int of_condition(Condition c) {
    switch (c) {
        case Condition::PathAhead: return kPathAhead;
        case Condition::PathLeft: return kPathLeft;
        case Condition::PathRight: return kPathRight;
        case Condition::NoPathAhead: return kNoPathAhead;
        case Condition::MarkerPresent: return kMarkerPresent;
        case Condition::NoMarkerPresent: return kNoMarkerPresent;
    }
    return kPad;
}

inline int of_iterator(int x) { return kIter2 + (x - kMinIterator); }

inline std::string name(int index) {
    static const std::array<const char*, kSize> names = {
        "PAD",       "BOS",       "Run",          "move",          "turnLeft",         "turnRight",
        "putMarker", "pickMarker", "Repeat",      "RepeatUntil",   "While",            "If",
        "IfElse",    "Else",      "End",          "pathAhead",     "pathLeft",         "pathRight",
        "no-pathAhead", "markerPresent", "no-markerPresent", "x2", "x3",               "x4",
        "x5",        "x6",        "x7",           "x8",            "x9",               "x10"};
    return (index >= 0 && index < kSize) ? names[static_cast<std::size_t>(index)] : "?";
}
}  // namespace dict

}  // namespace taskgen
