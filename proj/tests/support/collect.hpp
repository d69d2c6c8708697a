#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "compactfold/conformation.hpp"
#include "compactfold/enumeration.hpp"

namespace testing_collect {

// Keeps every visited path, in visit order.
class PathCollector : public compactfold::PathVisitor {
 public:
  std::vector<std::vector<compactfold::Site>> paths;

  std::string tag() const override { return "paths"; }
  std::unique_ptr<PathVisitor> fresh() const override { return std::make_unique<PathCollector>(); }
  void visit(std::span<const compactfold::Site> path) override { paths.emplace_back(path.begin(), path.end()); }
  void merge(PathVisitor& other) override {
    auto& o = static_cast<PathCollector&>(other);
    paths.insert(paths.end(), o.paths.begin(), o.paths.end());
  }
  void save(std::ostream& out) const override {
    out << paths.size() << '\n';
    for (const auto& p : paths) out << compactfold::path_to_hex(p) << '\n';
  }
  void load(std::istream& in) override {
    std::size_t n = 0;
    in >> n;
    paths.clear();
    for (std::size_t k = 0; k < n; ++k) {
      std::string hex;
      in >> hex;
      paths.push_back(compactfold::path_from_hex(hex));
    }
  }
};

}  // namespace testing_collect
