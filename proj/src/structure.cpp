#include "tfk/structure.hpp"

#include <cctype>
#include <cmath>

#include "tfk/error.hpp"

namespace tfk {

int AtomSystem::masked_count() const {
  int n = 0;
  for (auto m : predict_mask) n += m ? 1 : 0;
  return n;
}

void AtomSystem::validate() const {
  const std::size_t n = positions.size();
  if (n == 0) fail("system '" + identifier + "' has no atoms");
  if (elements.size() != n) fail("system '" + identifier + "': element count does not match atom count");
  if (predict_mask.size() != n) fail("system '" + identifier + "': mask size does not match atom count");
  for (std::size_t i = 0; i < n; ++i) {
    if (!positions[i].allFinite()) fail("system '" + identifier + "': non-finite coordinate at atom " + std::to_string(i));
    if (elements[i].empty()) fail("system '" + identifier + "': empty element symbol at atom " + std::to_string(i));
  }
  if (targets) {
    if (targets->size() != n) fail("system '" + identifier + "': target count does not match atom count");
    for (const auto& t : *targets) {
      if (!t.allFinite()) fail("system '" + identifier + "': non-finite target");
    }
  }
}

AtomSystem make_system(std::string identifier, Positions positions, std::vector<std::string> elements) {
  AtomSystem s;
  s.identifier = std::move(identifier);
  s.predict_mask.assign(positions.size(), 1);
  s.positions = std::move(positions);
  s.elements = std::move(elements);
  return s;
}

std::string normalize_element(std::string_view symbol) {
  std::string out;
  for (char c : symbol) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back(out.empty() ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                                : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

AtomSystem transformed(const AtomSystem& system, const RigidTransform& t) {
  AtomSystem out = system;
  for (auto& p : out.positions) p = t.apply(p);
  if (out.targets) {
    for (auto& v : *out.targets) v = t.rotation * v;
  }
  return out;
}

}  // namespace tfk
