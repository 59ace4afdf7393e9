#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dynostore {

#define DYNOSTORE_ERRC_LIST(X) \
  X(EmptyPath)                 \
  X(IllegalCharacter)          \
  X(PathTooLong)               \
  X(BadRequest)                \
  X(InvalidParams)             \
  X(InvalidDescriptor)         \
  X(NotEnoughContainers)       \
  X(NotEnoughChunks)           \
  X(HashMismatch)              \
  X(InconsistentHeaders)       \
  X(BadMagic)                  \
  X(Truncated)                 \
  X(InsufficientCapacity)      \
  X(NoFeasibleContainer)       \
  X(Unauthorized)              \
  X(OutOfSpace)                \
  X(BackendFailure)            \
  X(NotFound)                  \
  X(ParentNotFound)            \
  X(AlreadyExists)             \
  X(PermissionDenied)          \
  X(CollectionNotFound)        \
  X(ConsensusFailed)           \
  X(VersionExpired)            \
  X(ScopeNotFound)             \
  X(BadCredentials)            \
  X(UnknownContainer)          \
  X(ContainerWriteFailed)      \
  X(Unavailable)               \
  X(EncryptionKeyMissing)      \
  X(WrongKey)                  \
  X(ScenarioInvalid)           \
  X(InvariantViolation)

enum class Errc {
#define X(name) name,
  DYNOSTORE_ERRC_LIST(X)
#undef X
};

std::string_view errc_name(Errc code) noexcept;
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

// Every failure in the library surfaces as an Error carrying one of the codes
// above; the wire layers map codes to HTTP statuses and back by name.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dynostore
