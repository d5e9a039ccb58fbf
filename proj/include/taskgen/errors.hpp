#pragma once

#include <stdexcept>
#include <string>

namespace taskgen {

/// Malformed program text or program JSON.
struct SyntaxError : std::runtime_error {
    explicit SyntaxError(const std::string& what) : std::runtime_error("SyntaxError: " + what) {}
};

/// A construct, token, or value that the target domain's DSL does not allow.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error("DomainError: " + what) {}
};

/// Malformed grid/puzzle/task file contents.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error("FormatError: " + what) {}
};

/// Execution was asked to run on a puzzle that still contains unknown cells.
struct IncompletePuzzle : std::runtime_error {
    explicit IncompletePuzzle(const std::string& what) : std::runtime_error("IncompletePuzzle: " + what) {}
};

/// A slot id that does not address a condition/iterator slot of the code.
struct UnknownSlot : std::runtime_error {
    explicit UnknownSlot(const std::string& what) : std::runtime_error("UnknownSlot: " + what) {}
};

/// Generation reached a decision point with no legal choice left.
struct DeadEnd : std::runtime_error {
    explicit DeadEnd(const std::string& what) : std::runtime_error("DeadEnd: " + what) {}
};

/// A bounded search or enumeration exceeded its configured budget.
struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error("BudgetExceeded: " + what) {}
};

/// A decision fed back into an engine that its masks had ruled out.
struct IllegalDecision : std::runtime_error {
    explicit IllegalDecision(const std::string& what) : std::runtime_error("IllegalDecision: " + what) {}
};

/// Supervised target code does not complete the sketch under the given spec.
struct ExemplarMismatch : std::runtime_error {
    explicit ExemplarMismatch(const std::string& what) : std::runtime_error("ExemplarMismatch: " + what) {}
};

/// Dataset building could not collect enough admissible codes.
struct NoValidCodes : std::runtime_error {
    explicit NoValidCodes(const std::string& what) : std::runtime_error("NoValidCodes: " + what) {}
};

/// No structure of the requested shape exists in the domain DSL.
struct StructureUnsatisfiable : std::runtime_error {
    explicit StructureUnsatisfiable(const std::string& what)
        : std::runtime_error("StructureUnsatisfiable: " + what) {}
};

/// Checkpoint file or version problems.
struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& what) : std::runtime_error("CheckpointError: " + what) {}
};

}  // namespace taskgen
