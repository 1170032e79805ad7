#include "cli/binder.hpp"

#include <climits>

namespace ehap::cli {

namespace {

json with_doc(json entry, const char* doc) {
  if (doc) entry["description"] = doc;
  return entry;
}

}  // namespace

Binder Binder::reader(const json& in, std::string path) {
  Binder b(Mode::kRead, &in, nullptr, std::move(path));
  if (!in.is_object()) {
    throw ConfigError((b.path_.empty() ? std::string("config") : b.path_) + ": expected an object",
                      {}, b.path_);
  }
  return b;
}

Binder Binder::writer(json& out) {
  out = json::object();
  return Binder(Mode::kWrite, nullptr, &out, {});
}

Binder Binder::schema(json& out) {
  out = {{"type", "object"}, {"additionalProperties", false}, {"properties", json::object()}};
  return Binder(Mode::kSchema, nullptr, &out, {});
}

bool Binder::has(const char* key) const { return in_ && in_->contains(key); }

bool Binder::mark(const char* key) {
  if (!in_->contains(key)) return false;
  seen_.insert(key);
  return true;
}

json& Binder::props() { return (*out_)["properties"]; }

void Binder::fail(const char* key, const std::string& message) const {
  const std::string k = child(key);
  throw ConfigError(k + ": " + message, {}, k);
}

void Binder::finish() const {
  for (const auto& [k, v] : in_->items()) {
    if (!seen_.count(k)) fail(k.c_str(), "unknown key");
  }
}

void Binder::leaf(const char* key, json schema_entry, const char* doc) {
  props()[key] = with_doc(std::move(schema_entry), doc);
}

void Binder::num(const char* key, double& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead:
      if (!mark(key)) return;
      if (!in_->at(key).is_number()) fail(key, "expected a number");
      v = in_->at(key).get<double>();
      return;
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key, {{"type", "number"}, {"default", v}}, doc);
  }
}

void Binder::integer(const char* key, int& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead: {
      if (!mark(key)) return;
      const json& j = in_->at(key);
      if (!j.is_number_integer()) fail(key, "expected an integer");
      const auto x = j.get<long long>();
      if (x < INT_MIN || x > INT_MAX) fail(key, "integer out of range");
      v = static_cast<int>(x);
      return;
    }
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key, {{"type", "integer"}, {"default", v}}, doc);
  }
}

void Binder::count(const char* key, std::size_t& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead: {
      if (!mark(key)) return;
      const json& j = in_->at(key);
      if (!j.is_number_integer() || j.get<long long>() < 0) fail(key, "expected a non-negative integer");
      v = j.get<std::size_t>();
      return;
    }
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key, {{"type", "integer"}, {"minimum", 0}, {"default", v}}, doc);
  }
}

void Binder::flag(const char* key, bool& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead:
      if (!mark(key)) return;
      if (!in_->at(key).is_boolean()) fail(key, "expected true or false");
      v = in_->at(key).get<bool>();
      return;
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key, {{"type", "boolean"}, {"default", v}}, doc);
  }
}

void Binder::text(const char* key, std::string& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead:
      if (!mark(key)) return;
      if (!in_->at(key).is_string()) fail(key, "expected a string");
      v = in_->at(key).get<std::string>();
      return;
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key, {{"type", "string"}, {"default", v}}, doc);
  }
}

void Binder::vec3(const char* key, Vec3& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead: {
      if (!mark(key)) return;
      const json& j = in_->at(key);
      if (!j.is_array() || j.size() != 3) fail(key, "expected an array of 3 numbers");
      for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) fail(key, "expected an array of 3 numbers");
        v[i] = j[i].get<double>();
      }
      return;
    }
    case Mode::kWrite:
      (*out_)[key] = {v.x(), v.y(), v.z()};
      return;
    case Mode::kSchema:
      leaf(key,
           {{"type", "array"},
            {"items", {{"type", "number"}}},
            {"minItems", 3},
            {"maxItems", 3},
            {"default", {v.x(), v.y(), v.z()}}},
           doc);
  }
}

void Binder::int3(const char* key, std::array<int, 3>& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead: {
      if (!mark(key)) return;
      const json& j = in_->at(key);
      if (!j.is_array() || j.size() != 3) fail(key, "expected an array of 3 integers");
      for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number_integer()) fail(key, "expected an array of 3 integers");
        v[i] = j[i].get<int>();
      }
      return;
    }
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key,
           {{"type", "array"},
            {"items", {{"type", "integer"}}},
            {"minItems", 3},
            {"maxItems", 3},
            {"default", v}},
           doc);
  }
}

void Binder::bools4(const char* key, std::array<bool, 4>& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead: {
      if (!mark(key)) return;
      const json& j = in_->at(key);
      if (!j.is_array() || j.size() != 4) fail(key, "expected an array of 4 booleans");
      for (int i = 0; i < 4; ++i) {
        if (!j[i].is_boolean()) fail(key, "expected an array of 4 booleans");
        v[i] = j[i].get<bool>();
      }
      return;
    }
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key,
           {{"type", "array"},
            {"items", {{"type", "boolean"}}},
            {"minItems", 4},
            {"maxItems", 4},
            {"default", v}},
           doc);
  }
}

void Binder::strings(const char* key, std::vector<std::string>& v, const char* doc) {
  switch (mode_) {
    case Mode::kRead: {
      if (!mark(key)) return;
      const json& j = in_->at(key);
      if (!j.is_array()) fail(key, "expected an array of strings");
      v.clear();
      for (const auto& e : j) {
        if (!e.is_string()) fail(key, "expected an array of strings");
        v.push_back(e.get<std::string>());
      }
      return;
    }
    case Mode::kWrite:
      (*out_)[key] = v;
      return;
    case Mode::kSchema:
      leaf(key, {{"type", "array"}, {"items", {{"type", "string"}}}, {"default", v}}, doc);
  }
}

}  // namespace ehap::cli
