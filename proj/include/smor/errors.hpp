#pragma once

#include <stdexcept>
#include <string>

namespace smor {

/// Base of every library error. `code()` is a stable machine-readable tag
/// used by the CLI for its failure line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define SMOR_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(tag, what) {}       \
  };

SMOR_DEFINE_ERROR(DimensionError, "dimension")
SMOR_DEFINE_ERROR(NotOnManifoldError, "not-on-manifold")
SMOR_DEFINE_ERROR(AnchorMismatchError, "anchor-mismatch")
SMOR_DEFINE_ERROR(RetractionSingularError, "retraction-singular")
SMOR_DEFINE_ERROR(SectionDegenerateError, "section-degenerate")
SMOR_DEFINE_ERROR(DivisionDegenerateError, "division-degenerate")
SMOR_DEFINE_ERROR(IntegrationFailureError, "integration-failure")
SMOR_DEFINE_ERROR(StaleTapeError, "stale-tape")
SMOR_DEFINE_ERROR(ConfigError, "config")
SMOR_DEFINE_ERROR(IoError, "io")
SMOR_DEFINE_ERROR(NormalizationError, "normalization")
SMOR_DEFINE_ERROR(EmptyDataError, "empty-data")

#undef SMOR_DEFINE_ERROR

}  // namespace smor
