#pragma once

#include <json.hpp>
#include <string>
#include <string_view>

#include "eidcloud/errors.hpp"

namespace eidcloud::detail {

using Json = nlohmann::ordered_json;

inline std::string line_context(std::string_view text, std::size_t offset)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

/// Throws ScenarioError naming the line and column of a syntax error.
inline Json parse_json(std::string_view text, std::string_view what)
{
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const auto at = e.byte > 0 ? e.byte - 1 : 0;
        throw ScenarioError(std::string(what) + ": " + line_context(text, at) + ": syntax error");
    }
}

inline const Json& member(const Json& j, std::string_view key, std::string_view where)
{
    if (!j.is_object()) throw ScenarioError(std::string(where) + ": expected an object");
    auto it = j.find(key);
    if (it == j.end())
        throw ScenarioError(std::string(where) + ": missing field \"" + std::string(key) + "\"");
    return *it;
}

inline std::string string_member(const Json& j, std::string_view key, std::string_view where)
{
    const auto& v = member(j, key, where);
    if (!v.is_string())
        throw ScenarioError(std::string(where) + ": field \"" + std::string(key) +
                            "\" must be a string");
    return v.get<std::string>();
}

inline std::string optional_string(const Json& j, std::string_view key, std::string fallback = {})
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string())
        throw ScenarioError("field \"" + std::string(key) + "\" must be a string");
    return it->get<std::string>();
}

inline const Json& array_member(const Json& j, std::string_view key, std::string_view where)
{
    const auto& v = member(j, key, where);
    if (!v.is_array())
        throw ScenarioError(std::string(where) + ": field \"" + std::string(key) +
                            "\" must be an array");
    return v;
}

}  // namespace eidcloud::detail
