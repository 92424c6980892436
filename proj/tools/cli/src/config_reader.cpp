#include "multitime_cli/config_reader.hpp"

#include <cmath>

namespace multitime::cli {

std::string pointer_join(const std::string& base, const std::string& key) {
    std::string escaped;
    for (char c : key) {
        if (c == '~') escaped += "~0";
        else if (c == '/') escaped += "~1";
        else escaped += c;
    }
    return base + "/" + escaped;
}

std::string pointer_join(const std::string& base, std::size_t index) {
    return base + "/" + std::to_string(index);
}

double json_double(const json& v, const std::string& pointer) {
    if (!v.is_number()) throw ConfigError(pointer, std::string("expected a number, got ") + v.type_name());
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(pointer, "expected a finite number");
    return d;
}

std::uint64_t json_unsigned(const json& v, const std::string& pointer) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        throw ConfigError(pointer, "expected a non-negative integer");
    }
    throw ConfigError(pointer, std::string("expected an integer, got ") + v.type_name());
}

bool json_bool(const json& v, const std::string& pointer) {
    if (!v.is_boolean()) throw ConfigError(pointer, std::string("expected a boolean, got ") + v.type_name());
    return v.get<bool>();
}

std::string json_string(const json& v, const std::string& pointer) {
    if (!v.is_string()) throw ConfigError(pointer, std::string("expected a string, got ") + v.type_name());
    return v.get<std::string>();
}

void require_array(const json& v, const std::string& pointer) {
    if (!v.is_array()) throw ConfigError(pointer, std::string("expected an array, got ") + v.type_name());
}

// ---------------------------------------------------------------------------

ObjectReader::ObjectReader(const json& in, std::string pointer) : in_(&in), pointer_(std::move(pointer)) {
    if (!in.is_object()) {
        throw ConfigError(pointer_, std::string("expected an object, got ") + in.type_name());
    }
}

bool ObjectReader::has(const std::string& key) const { return in_->contains(key); }

const json& ObjectReader::take(const std::string& key) {
    auto it = in_->find(key);
    if (it == in_->end()) throw ConfigError(pointer_join(pointer_, key), "missing required key '" + key + "'");
    seen_.insert(key);
    return *it;
}

const json& ObjectReader::raw(const std::string& key) {
    const json& v = take(key);
    echo_[key] = v;
    return v;
}

ObjectReader ObjectReader::object(const std::string& key) {
    const json& v = take(key);
    return ObjectReader(v, pointer_join(pointer_, key));
}

ObjectReader ObjectReader::object_or_empty(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) return ObjectReader(empty, pointer_join(pointer_, key));
    return object(key);
}

std::vector<ObjectReader> ObjectReader::objects(const std::string& key) {
    const json& v = take(key);
    const std::string p = pointer_join(pointer_, key);
    if (!v.is_array()) throw ConfigError(p, std::string("expected an array, got ") + v.type_name());
    std::vector<ObjectReader> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], pointer_join(p, i));
    return out;
}

json ObjectReader::finish() {
    for (auto it = in_->begin(); it != in_->end(); ++it) {
        if (seen_.count(it.key()) == 0) {
            throw ConfigError(pointer_join(pointer_, it.key()), "unknown key '" + it.key() + "'");
        }
    }
    return echo_;
}

void ObjectReader::fail(const std::string& key, const std::string& message) const {
    throw ConfigError(key.empty() ? pointer_ : pointer_join(pointer_, key), message);
}

}  // namespace multitime::cli
