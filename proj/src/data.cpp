#include "bnmc/data.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bnmc {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + path + "'");
  out << text;
}

DataFile parse_data(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw RuntimeError(std::string("data file is not valid JSON: ") + e.what());
  }
  DataFile d;
  if (doc.contains("hyper")) {
    for (const auto& [name, v] : doc.at("hyper").items()) {
      if (v.is_number_integer()) {
        d.hyper.set_int(name, v.get<long long>());
      } else if (v.is_number()) {
        d.hyper.set_real(name, v.get<double>());
      } else if (v.is_array()) {
        std::vector<long long> arr;
        for (const auto& x : v) {
          if (!x.is_number_integer()) {
            throw RuntimeError("hyperparameter array '" + name + "' must hold integers");
          }
          arr.push_back(x.get<long long>());
        }
        d.hyper.set_array(name, std::move(arr));
      } else {
        throw RuntimeError("hyperparameter '" + name + "' must be a number or integer array");
      }
    }
  }
  if (doc.contains("arrays")) {
    for (const auto& [name, v] : doc.at("arrays").items()) {
      if (!v.is_array()) throw RuntimeError("array '" + name + "' must be a JSON array");
      bool all_int = true;
      for (const auto& x : v) {
        if (!x.is_number()) throw RuntimeError("array '" + name + "' must hold numbers");
        all_int = all_int && x.is_number_integer();
      }
      if (all_int) {
        std::vector<long long> arr;
        for (const auto& x : v) arr.push_back(x.get<long long>());
        d.int_arrays[name] = std::move(arr);
      } else {
        std::vector<double> arr;
        for (const auto& x : v) arr.push_back(x.get<double>());
        d.real_arrays[name] = std::move(arr);
      }
    }
  }
  return d;
}

DataFile load_data(const std::string& path) { return parse_data(read_text_file(path)); }

std::string serialize_data(const DataFile& d) {
  json doc;
  doc["hyper"] = json::object();
  for (const auto& [name, v] : d.hyper.values) {
    if (const auto* i = std::get_if<long long>(&v)) {
      doc["hyper"][name] = *i;
    } else if (const auto* r = std::get_if<double>(&v)) {
      doc["hyper"][name] = *r;
    } else {
      doc["hyper"][name] = std::get<std::vector<long long>>(v);
    }
  }
  doc["arrays"] = json::object();
  for (const auto& [name, v] : d.int_arrays) doc["arrays"][name] = v;
  for (const auto& [name, v] : d.real_arrays) doc["arrays"][name] = v;
  return doc.dump(2) + "\n";
}

void save_data(const DataFile& d, const std::string& path) {
  write_text_file(path, serialize_data(d));
}

void apply_data(const CheckedModel& model, const std::vector<VarLayout>& layouts,
                const DataFile& d, ParamStore& store) {
  for (const auto& v : model.vars) {
    const VarLayout& l = layouts[static_cast<std::size_t>(v.id)];
    const std::size_t want = static_cast<std::size_t>(l.flat_values());
    const bool have_int = d.int_arrays.count(v.name) > 0;
    const bool have_real = d.real_arrays.count(v.name) > 0;
    if (!have_int && !have_real) {
      if (store.observed[static_cast<std::size_t>(v.id)]) {
        throw RuntimeError("observed variable '" + v.name + "' is missing from the data file");
      }
      continue;
    }
    if (v.is_int) {
      if (!have_int) throw RuntimeError("variable '" + v.name + "' must be an integer array");
      const auto& arr = d.int_arrays.at(v.name);
      if (arr.size() != want) {
        throw RuntimeError("variable '" + v.name + "' has length " +
                           std::to_string(arr.size()) + ", expected " + std::to_string(want));
      }
      store.ival[static_cast<std::size_t>(v.id)] = arr;
    } else {
      std::vector<double> arr;
      if (have_real) {
        arr = d.real_arrays.at(v.name);
      } else {
        for (long long x : d.int_arrays.at(v.name)) arr.push_back(static_cast<double>(x));
      }
      if (arr.size() != want) {
        throw RuntimeError("variable '" + v.name + "' has length " +
                           std::to_string(arr.size()) + ", expected " + std::to_string(want));
      }
      store.real[static_cast<std::size_t>(v.id)] = std::move(arr);
    }
  }
}

std::string serialize_trace(const Trace& t) {
  ordered_json doc;
  doc["model"] = t.model;
  doc["method"] = t.method;
  doc["seed"] = t.seed;
  doc["samples"] = ordered_json::array();
  for (const auto& s : t.samples) {
    ordered_json state = ordered_json::object();
    for (std::size_t i = 0; i < t.var_names.size(); ++i) {
      if (!s.ints[i].empty()) {
        state[t.var_names[i]] = s.ints[i];
      } else {
        state[t.var_names[i]] = s.real[i];
      }
    }
    doc["samples"].push_back(std::move(state));
  }
  doc["log_joint"] = t.log_joint;
  ordered_json map_state = ordered_json::object();
  for (std::size_t i = 0; i < t.var_names.size(); ++i) {
    if (!t.map_state.ints.empty() && !t.map_state.ints[i].empty()) {
      map_state[t.var_names[i]] = t.map_state.ints[i];
    } else if (!t.map_state.real.empty()) {
      map_state[t.var_names[i]] = t.map_state.real[i];
    }
  }
  doc["map_state"] = std::move(map_state);
  doc["map_log_joint"] = t.map_log_joint;
  doc["timing_ms"] = t.timing_ms;
  return doc.dump(2) + "\n";
}

void save_trace(const Trace& t, const std::string& path) {
  write_text_file(path, serialize_trace(t));
}

}  // namespace bnmc
