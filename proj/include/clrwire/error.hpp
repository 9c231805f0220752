#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace clrwire {

// Base for all recoverable errors raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateCurve : Error {
    explicit DegenerateCurve(const std::string& msg) : Error("DegenerateCurve: " + msg) {}
};
struct EmptyWireframe : Error {
    explicit EmptyWireframe(const std::string& msg) : Error("EmptyWireframe: " + msg) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error("SchemaError: " + msg) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error("ParseError: " + msg) {}
};
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("IoError: " + msg) {}
};
struct NonUnitAxis : Error {
    explicit NonUnitAxis(const std::string& msg) : Error("NonUnitAxis: " + msg) {}
};
struct InvalidFrame : Error {
    explicit InvalidFrame(const std::string& msg) : Error("InvalidFrame: " + msg) {}
};
struct DisconnectedGraph : Error {
    std::vector<int> component_sizes;
    explicit DisconnectedGraph(std::vector<int> sizes)
        : Error("DisconnectedGraph: " + describe(sizes)), component_sizes(std::move(sizes)) {}
    static std::string describe(const std::vector<int>& sizes) {
        std::string s = "component sizes [";
        for (size_t i = 0; i < sizes.size(); ++i) s += (i ? "," : "") + std::to_string(sizes[i]);
        return s + "]";
    }
};
struct ClassOverflow : Error {
    int row, value, limit;
    ClassOverflow(int row_, int value_, int limit_)
        : Error("ClassOverflow: row " + std::to_string(row_) + " value " + std::to_string(value_) +
                " exceeds class limit " + std::to_string(limit_)),
          row(row_), value(value_), limit(limit_) {}
};
struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& msg) : Error("ShapeMismatch: " + msg) {}
};
struct FiniteCheck : Error {
    explicit FiniteCheck(const std::string& msg) : Error("FiniteCheck: " + msg) {}
};
struct ClassOutOfRange : Error {
    explicit ClassOutOfRange(const std::string& msg) : Error("ClassOutOfRange: " + msg) {}
};
struct OddDimension : Error {
    explicit OddDimension(const std::string& msg) : Error("OddDimension: " + msg) {}
};
struct NotNormalized : Error {
    explicit NotNormalized(const std::string& msg) : Error("NotNormalized: " + msg) {}
};
struct TooManyCurves : Error {
    TooManyCurves(int n, int m)
        : Error("TooManyCurves: wireframe has " + std::to_string(n) + " curves, decoder capacity " +
                std::to_string(m)) {}
};
struct NotCanonical : Error {
    explicit NotCanonical(const std::string& msg) : Error("NotCanonical: " + msg) {}
};
struct NoValidSlots : Error {
    explicit NoValidSlots(const std::string& msg) : Error("NoValidSlots: " + msg) {}
};
struct CodecError : Error {
    explicit CodecError(const std::string& msg) : Error("CodecError: " + msg) {}
};
struct NonFiniteState : Error {
    int step;
    explicit NonFiniteState(int step_)
        : Error("NonFiniteState: ODE state non-finite at step " + std::to_string(step_)), step(step_) {}
};
struct EmptyPointSet : Error {
    explicit EmptyPointSet(const std::string& msg) : Error("EmptyPointSet: " + msg) {}
};
struct ZeroVector : Error {
    explicit ZeroVector(const std::string& msg) : Error("ZeroVector: " + msg) {}
};
struct EmptySet : Error {
    explicit EmptySet(const std::string& msg) : Error("EmptySet: " + msg) {}
};
struct SizeMismatch : Error {
    explicit SizeMismatch(const std::string& msg) : Error("SizeMismatch: " + msg) {}
};
struct SizeLimit : Error {
    explicit SizeLimit(const std::string& msg) : Error("SizeLimit: " + msg) {}
};
struct DegenerateLabels : Error {
    explicit DegenerateLabels(const std::string& msg) : Error("DegenerateLabels: " + msg) {}
};
struct CheckpointError : Error {
    explicit CheckpointError(const std::string& msg) : Error("CheckpointError: " + msg) {}
};

}  // namespace clrwire
