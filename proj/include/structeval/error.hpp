#pragma once

#include <stdexcept>
#include <string>

namespace structeval {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmptyCorpus : Error {
  EmptyCorpus() : Error("empty corpus") {}
  explicit EmptyCorpus(const std::string& what) : Error(what) {}
};

struct InvalidReference : Error {
  explicit InvalidReference(const std::string& reason) : Error("invalid reference: " + reason) {}
};

struct NonFiniteCost : Error {
  NonFiniteCost() : Error("cost matrix contains a non-finite entry") {}
};

struct GroupTooSmall : Error {
  explicit GroupTooSmall(std::size_t k)
      : Error("advantage group needs at least 2 rewards, got " + std::to_string(k)) {}
};

struct LengthMismatch : Error {
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

struct ConfigError : Error {
  using Error::Error;
};

struct MalformedLine : Error {
  MalformedLine(std::size_t line_no, const std::string& why)
      : Error("line " + std::to_string(line_no) + ": " + why), line(line_no) {}
  std::size_t line;
};

struct DuplicateId : Error {
  explicit DuplicateId(const std::string& id_) : Error("duplicate id: " + id_), id(id_) {}
  std::string id;
};

}  // namespace structeval
