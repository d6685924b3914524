#pragma once

#include <stdexcept>
#include <string>

namespace metrolab {

// Base class for all domain errors. what() always starts with the error
// name so CLI messages and report field markers can surface it verbatim.
class MetrologyError : public std::runtime_error {
  public:
    MetrologyError(std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

  private:
    std::string name_;
};

#define METROLAB_DEFINE_ERROR(ErrorName)                                       \
    class ErrorName : public MetrologyError {                                  \
      public:                                                                  \
        explicit ErrorName(const std::string& message)                         \
            : MetrologyError(#ErrorName, message) {}                           \
    }

METROLAB_DEFINE_ERROR(DimensionError);      // operand dimensions disagree
METROLAB_DEFINE_ERROR(SizeError);           // beyond supported problem size
METROLAB_DEFINE_ERROR(ArityError);          // too few systems for a network kind
METROLAB_DEFINE_ERROR(NormalizationError);  // state vector norm off unit
METROLAB_DEFINE_ERROR(HermiticityError);    // matrix not self-adjoint
METROLAB_DEFINE_ERROR(TruncationError);     // discarded Fock tail too heavy
METROLAB_DEFINE_ERROR(CompletenessError);   // POVM effects do not sum to identity
METROLAB_DEFINE_ERROR(DegenerateError);     // zero probability with nonzero slope
METROLAB_DEFINE_ERROR(NoInformationError);  // Fisher information not positive
METROLAB_DEFINE_ERROR(NoResourceError);     // resource count vanishes
METROLAB_DEFINE_ERROR(SharpGeneratorError); // generator variance vanishes
METROLAB_DEFINE_ERROR(FlatSignalError);     // observable mean has zero slope
METROLAB_DEFINE_ERROR(WindowError);         // likelihood maximized at window edge
METROLAB_DEFINE_ERROR(SchemaError);         // scenario parameters fail validation
METROLAB_DEFINE_ERROR(NumericalError);      // internal tolerance violated
METROLAB_DEFINE_ERROR(IoError);             // file output failed

#undef METROLAB_DEFINE_ERROR

} // namespace metrolab
