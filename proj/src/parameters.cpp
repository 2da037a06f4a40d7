#include "tfk/parameters.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "tfk/error.hpp"

namespace tfk {

int ParameterStore::add(std::string name, std::vector<int> shape, ParamInit init, int fan_in) {
  if (find(name) >= 0) fail("duplicate parameter '" + name + "'");
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  if (n == 0) fail("empty parameter '" + name + "'");
  arrays_.push_back({std::move(name), std::move(shape), std::vector<double>(n, 0.0), init, fan_in});
  return size() - 1;
}

std::size_t ParameterStore::total_size() const {
  std::size_t n = 0;
  for (const auto& a : arrays_) n += a.values.size();
  return n;
}

int ParameterStore::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (arrays_[i].name == name) return i;
  return -1;
}

ParameterStore ParameterStore::zeros_like() const {
  ParameterStore z = *this;
  z.set_zero();
  return z;
}

void ParameterStore::set_zero() {
  for (auto& a : arrays_) std::fill(a.values.begin(), a.values.end(), 0.0);
}

double& ParameterStore::flat(std::size_t index) {
  for (auto& a : arrays_) {
    if (index < a.values.size()) return a.values[index];
    index -= a.values.size();
  }
  fail("flat parameter index out of range");
}

double ParameterStore::flat(std::size_t index) const { return const_cast<ParameterStore*>(this)->flat(index); }

bool ParameterStore::same_layout(const ParameterStore& other) const {
  if (other.size() != size()) return false;
  for (int i = 0; i < size(); ++i) {
    if (arrays_[i].name != other.arrays_[i].name || arrays_[i].shape != other.arrays_[i].shape) return false;
  }
  return true;
}

}  // namespace tfk
