#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tfk {

enum class ParamInit { kUniformFanIn, kOnes, kZeros };

struct ParameterArray {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;
  ParamInit init = ParamInit::kZeros;
  int fan_in = 1;
};

/// Flat named real arrays in declaration order.
class ParameterStore {
 public:
  int add(std::string name, std::vector<int> shape, ParamInit init, int fan_in = 1);

  int size() const { return static_cast<int>(arrays_.size()); }
  std::size_t total_size() const;

  ParameterArray& operator[](int id) { return arrays_[id]; }
  const ParameterArray& operator[](int id) const { return arrays_[id]; }
  const std::vector<ParameterArray>& arrays() const { return arrays_; }
  std::vector<ParameterArray>& arrays() { return arrays_; }

  /// Id of the named array or -1.
  int find(const std::string& name) const;

  /// Same names and shapes, all values zero.
  ParameterStore zeros_like() const;
  void set_zero();

  /// Element `flat` of the concatenation of all arrays.
  double& flat(std::size_t index);
  double flat(std::size_t index) const;

  bool same_layout(const ParameterStore& other) const;

 private:
  std::vector<ParameterArray> arrays_;
};

}  // namespace tfk
