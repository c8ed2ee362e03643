#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bnmc/model.hpp"

namespace bnmc {

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using HyperVal = std::variant<long long, double, std::vector<long long>>;

struct HyperValues {
  std::map<std::string, HyperVal> values;

  void set_int(const std::string& n, long long v) { values[n] = v; }
  void set_real(const std::string& n, double v) { values[n] = v; }
  void set_array(const std::string& n, std::vector<long long> v) { values[n] = std::move(v); }
};

// Hyperparameter values plus materialized deterministic declarations.
struct Bindings {
  const CheckedModel* model = nullptr;
  std::vector<long long> hyper_int;               // per hyper id
  std::vector<double> hyper_real;                 // per hyper id
  std::vector<std::vector<long long>> hyper_arr;  // per hyper id
  std::vector<double> det_scalar;                 // per det id
  std::vector<std::vector<double>> det_vec;       // per det id
};

// Evaluates all deterministic declarations; throws RuntimeError if a
// hyperparameter is missing or of the wrong type.
Bindings make_bindings(const CheckedModel& model, const HyperValues& hyper);

// Flat storage shape of one variable: up to two plate levels, the second
// possibly ragged, each element scalar or a row of `width` reals.
struct VarLayout {
  int levels = 0;
  long long count0 = 1;
  long long uniform1 = -1;            // -1 when ragged
  std::vector<long long> offsets;     // ragged prefix sums, size count0+1
  long long total = 1;                // number of elements
  long long width = 1;                // row width (vector elements)

  long long flat_values() const { return total * width; }

  long long flatten1(long long i) const { return i; }
  long long flatten2(long long i, long long j) const {
    return uniform1 >= 0 ? i * uniform1 + j : offsets[static_cast<std::size_t>(i)] + j;
  }
  long long flatten(std::span<const long long> ix) const {
    if (levels == 0) return 0;
    if (levels == 1) return ix[0];
    return flatten2(ix[0], ix[1]);
  }
  // Inverse of flatten for element enumeration.
  void unflatten(long long flat, long long out[2]) const;
  long long level1_count(long long i) const {
    return uniform1 >= 0 ? uniform1
                         : offsets[static_cast<std::size_t>(i) + 1] - offsets[static_cast<std::size_t>(i)];
  }
};

std::vector<VarLayout> make_layouts(const CheckedModel& model, const Bindings& bind);

// Flat typed arrays holding the model support, plus the observed mask.
struct ParamStore {
  std::vector<std::vector<double>> real;      // per var id (real-valued vars)
  std::vector<std::vector<long long>> ival;   // per var id (int-valued vars)
  std::vector<char> observed;                 // per var id

  double* real_data(int var) { return real[static_cast<std::size_t>(var)].data(); }
  const double* real_data(int var) const { return real[static_cast<std::size_t>(var)].data(); }
  long long* int_data(int var) { return ival[static_cast<std::size_t>(var)].data(); }
  const long long* int_data(int var) const { return ival[static_cast<std::size_t>(var)].data(); }
};

// Zero-initialized store with the shapes demanded by the layouts.
ParamStore allocate_store(const CheckedModel& model, const std::vector<VarLayout>& layouts);

// Checks that present arrays have the exact flat lengths the layouts imply;
// throws RuntimeError naming the variable with expected vs actual lengths.
void validate_store(const CheckedModel& model, const std::vector<VarLayout>& layouts,
                    const ParamStore& store);

}  // namespace bnmc
