#pragma once

// nlohmann::json <-> Python object conversion for the bindings.

#include <pybind11/pybind11.h>

#include <json.hpp>

namespace davar_py {

namespace py = pybind11;

inline py::object json_to_py(const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::null:
      return py::none();
    case nlohmann::json::value_t::boolean:
      return py::bool_(v.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return py::int_(v.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(v.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float:
      return py::float_(v.get<double>());
    case nlohmann::json::value_t::string:
      return py::str(v.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& item : v) out.append(json_to_py(item));
      return out;
    }
    case nlohmann::json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : v.items()) {
        out[py::str(key)] = json_to_py(value);
      }
      return out;
    }
    default:
      return py::none();
  }
}

inline nlohmann::json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    nlohmann::json out = nlohmann::json::object();
    for (auto item : obj.cast<py::dict>()) {
      out[item.first.cast<std::string>()] = py_to_json(item.second);
    }
    return out;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    nlohmann::json out = nlohmann::json::array();
    for (auto item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
    return out;
  }
  throw py::type_error("value is not convertible to JSON");
}

}  // namespace davar_py
