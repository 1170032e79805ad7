#pragma once

// Two-way mapping between config structs and JSON. One declaration per struct
// drives parsing (with unknown-key rejection), serialisation of the resolved
// config and JSON Schema generation.

#include <array>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "ehap/bspline.hpp"
#include "ehap/cli.hpp"

namespace ehap::cli {

using nlohmann::json;

class Binder {
 public:
  enum class Mode { kRead, kWrite, kSchema };

  static Binder reader(const json& in, std::string path = {});
  static Binder writer(json& out);
  static Binder schema(json& out);

  Mode mode() const { return mode_; }
  bool reading() const { return mode_ == Mode::kRead; }
  bool has(const char* key) const;

  void num(const char* key, double& v, const char* doc = nullptr);
  void integer(const char* key, int& v, const char* doc = nullptr);
  void count(const char* key, std::size_t& v, const char* doc = nullptr);
  void flag(const char* key, bool& v, const char* doc = nullptr);
  void text(const char* key, std::string& v, const char* doc = nullptr);
  void vec3(const char* key, Vec3& v, const char* doc = nullptr);
  void int3(const char* key, std::array<int, 3>& v, const char* doc = nullptr);
  void bools4(const char* key, std::array<bool, 4>& v, const char* doc = nullptr);
  void strings(const char* key, std::vector<std::string>& v, const char* doc = nullptr);

  template <class F>
  void section(const char* key, F&& fn) {
    if (mode_ == Mode::kRead) {
      if (!mark(key)) return;
      Binder sub = reader(in_->at(key), child(key));
      fn(sub);
      sub.finish();
    } else {
      json& slot = mode_ == Mode::kWrite ? (*out_)[key] : props()[key];
      slot = json::object();
      Binder sub = mode_ == Mode::kWrite ? writer(slot) : schema(slot);
      fn(sub);
    }
  }

  // Variable-length array of objects.
  template <class T, class F>
  void list(const char* key, std::vector<T>& v, F&& fn) {
    if (mode_ == Mode::kRead) {
      if (!mark(key)) return;
      const json& arr = in_->at(key);
      if (!arr.is_array()) fail(key, "expected an array");
      v.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        T item{};
        Binder sub = reader(arr[i], child(key) + "[" + std::to_string(i) + "]");
        fn(sub, item);
        sub.finish();
        v.push_back(std::move(item));
      }
    } else if (mode_ == Mode::kWrite) {
      json arr = json::array();
      for (auto& item : v) {
        json o = json::object();
        Binder sub = writer(o);
        fn(sub, item);
        arr.push_back(std::move(o));
      }
      (*out_)[key] = std::move(arr);
    } else {
      json item_schema = json::object();
      T item{};
      Binder sub = schema(item_schema);
      fn(sub, item);
      json defaults = json::array();
      for (auto& d : v) {
        json o = json::object();
        Binder w = writer(o);
        fn(w, d);
        defaults.push_back(std::move(o));
      }
      props()[key] = {{"type", "array"}, {"items", item_schema}, {"default", defaults}};
    }
  }

  // Fixed-length array of objects.
  template <class T, std::size_t N, class F>
  void array(const char* key, std::array<T, N>& v, F&& fn) {
    if (mode_ == Mode::kRead) {
      if (!mark(key)) return;
      const json& arr = in_->at(key);
      if (!arr.is_array() || arr.size() != N) {
        fail(key, "expected an array of " + std::to_string(N) + " objects");
      }
      for (std::size_t i = 0; i < N; ++i) {
        Binder sub = reader(arr[i], child(key) + "[" + std::to_string(i) + "]");
        fn(sub, v[i]);
        sub.finish();
      }
    } else if (mode_ == Mode::kWrite) {
      json arr = json::array();
      for (auto& item : v) {
        json o = json::object();
        Binder sub = writer(o);
        fn(sub, item);
        arr.push_back(std::move(o));
      }
      (*out_)[key] = std::move(arr);
    } else {
      json item_schema = json::object();
      Binder sub = schema(item_schema);
      fn(sub, v[0]);
      props()[key] = {{"type", "array"}, {"items", item_schema}, {"minItems", N}, {"maxItems", N}};
    }
  }

  // Throws ConfigError naming this object's path if any key was not consumed.
  void finish() const;
  [[noreturn]] void fail(const char* key, const std::string& message) const;

 private:
  Binder(Mode mode, const json* in, json* out, std::string path)
      : mode_(mode), in_(in), out_(out), path_(std::move(path)) {}

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  bool mark(const char* key);
  json& props();
  void leaf(const char* key, json schema_entry, const char* doc);

  Mode mode_;
  const json* in_;
  json* out_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace ehap::cli
