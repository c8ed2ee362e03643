#pragma once

#include <map>
#include <string>
#include <vector>

#include "bnmc/sampler.hpp"
#include "bnmc/store.hpp"

namespace bnmc {

// On-disk data document: {"hyper": {...}, "arrays": {...}}. Hyperparameters
// are scalars or integer arrays; variable arrays are flat, ragged ones laid
// out with their lengths array.
struct DataFile {
  HyperValues hyper;
  std::map<std::string, std::vector<double>> real_arrays;
  std::map<std::string, std::vector<long long>> int_arrays;
};

DataFile parse_data(const std::string& json_text);
DataFile load_data(const std::string& path);
// Canonical rendering: sorted keys, two-space indent, trailing newline.
std::string serialize_data(const DataFile& d);
void save_data(const DataFile& d, const std::string& path);

// Copies the file's arrays into the store (matching variables by name) and
// checks that every variable the store marks observed is present with the
// exact flat length. Unlisted unobserved variables keep their current values.
void apply_data(const CheckedModel& model, const std::vector<VarLayout>& layouts,
                const DataFile& d, ParamStore& store);

std::string serialize_trace(const Trace& t);
void save_trace(const Trace& t, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace bnmc
