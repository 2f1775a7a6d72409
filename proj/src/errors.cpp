#include "boys/errors.hpp"

#include <string>

namespace boys {

namespace {

std::string list_indices(const std::vector<std::size_t>& bad) {
  std::string s = "invalid argument at index";
  s += bad.size() == 1 ? " " : "es ";
  for (std::size_t i = 0; i < bad.size(); ++i) {
    if (i == 8) {
      s += ", ... (" + std::to_string(bad.size()) + " total)";
      break;
    }
    if (i > 0) s += ", ";
    s += std::to_string(bad[i]);
  }
  return s;
}

}  // namespace

BatchDomainError::BatchDomainError(std::vector<std::size_t> bad)
    : DomainError(list_indices(bad)), bad_(std::move(bad)) {}

}  // namespace boys
