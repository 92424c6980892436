#pragma once

// Strict JSON object reader: every key read is echoed (defaults included)
// into a resolved copy, and keys that were never read are rejected.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

namespace multitime::cli {

using json = nlohmann::json;

/// Schema violation; `pointer` is the JSON pointer of the offending value.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer.empty() ? message : pointer + ": " + message),
          pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

std::string pointer_join(const std::string& base, const std::string& key);
std::string pointer_join(const std::string& base, std::size_t index);

double json_double(const json& value, const std::string& pointer);
std::uint64_t json_unsigned(const json& value, const std::string& pointer);
bool json_bool(const json& value, const std::string& pointer);
std::string json_string(const json& value, const std::string& pointer);
void require_array(const json& value, const std::string& pointer);

template <class T>
struct is_vector : std::false_type {};
template <class U>
struct is_vector<std::vector<U>> : std::true_type {};

template <class T>
T convert(const json& value, const std::string& pointer) {
    if constexpr (std::is_same_v<T, double>) {
        return json_double(value, pointer);
    } else if constexpr (std::is_same_v<T, bool>) {
        return json_bool(value, pointer);
    } else if constexpr (std::is_integral_v<T>) {
        return static_cast<T>(json_unsigned(value, pointer));
    } else if constexpr (std::is_same_v<T, std::string>) {
        return json_string(value, pointer);
    } else {
        static_assert(is_vector<T>::value, "unsupported config value type");
        require_array(value, pointer);
        T out;
        out.reserve(value.size());
        for (std::size_t i = 0; i < value.size(); ++i) {
            out.push_back(convert<typename T::value_type>(value[i], pointer_join(pointer, i)));
        }
        return out;
    }
}

class ObjectReader {
public:
    ObjectReader(const json& in, std::string pointer);

    const std::string& pointer() const noexcept { return pointer_; }
    bool has(const std::string& key) const;

    template <class T>
    T required(const std::string& key) {
        const json& v = take(key);
        T out = convert<T>(v, pointer_join(pointer_, key));
        echo_[key] = v;
        return out;
    }

    template <class T>
    T optional(const std::string& key, T fallback) {
        if (!has(key)) {
            echo_[key] = fallback;
            return fallback;
        }
        return required<T>(key);
    }

    template <class T>
    std::optional<T> maybe(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return required<T>(key);
    }

    /// Required nested object; its echo is attached by `attach`.
    ObjectReader object(const std::string& key);
    /// Optional nested object, read as {} when absent.
    ObjectReader object_or_empty(const std::string& key);
    /// Required array of objects.
    std::vector<ObjectReader> objects(const std::string& key);

    /// Raw access for values with custom validation; the value is echoed as is.
    const json& raw(const std::string& key);

    void attach(const std::string& key, json echo) { echo_[key] = std::move(echo); }
    void set_echo(const std::string& key, json value) { echo_[key] = std::move(value); }

    /// Rejects unread keys and returns the resolved object.
    json finish();

    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    const json& take(const std::string& key);

    const json* in_;
    std::string pointer_;
    std::set<std::string> seen_;
    json echo_ = json::object();
};

}  // namespace multitime::cli
