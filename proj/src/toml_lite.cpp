#include "sapt/toml_lite.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "sapt/error.hpp"

namespace sapt::toml {

using nlohmann::json;

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    json document() {
        json root = json::object();
        json* table = &root;
        while (true) {
            skip_ws_comments_newlines();
            if (eof()) break;
            if (peek() == '[') {
                if (peek(1) == '[') fail("arrays of tables are not supported");
                ++pos_;
                skip_inline_ws();
                auto path = key_path();
                skip_inline_ws();
                expect(']');
                table = &descend(root, path, true);
            } else {
                auto path = key_path();
                skip_inline_ws();
                expect('=');
                skip_inline_ws();
                json v = value();
                const std::string leaf = path.back();
                path.pop_back();
                json& parent = descend(*table, path, false);
                if (parent.contains(leaf)) fail("duplicate key '" + leaf + "'");
                parent[leaf] = std::move(v);
            }
            end_of_line();
        }
        return root;
    }

    json single_value() {
        skip_inline_ws();
        json v = value();
        skip_inline_ws();
        if (!eof()) fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

    bool eof() const { return pos_ >= s_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0'; }
    char next() {
        const char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        next();
    }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }
    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }
    void skip_ws_comments_newlines() {
        while (!eof()) {
            skip_inline_ws();
            skip_comment();
            if (peek() == '\r' || peek() == '\n') next();
            else break;
        }
    }
    void end_of_line() {
        skip_inline_ws();
        skip_comment();
        if (peek() == '\r') next();
        if (!eof() && peek() != '\n') fail("expected end of line");
    }

    std::string key() {
        if (peek() == '"') return basic_string();
        if (peek() == '\'') return literal_string();
        std::string k;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
            k += next();
        if (k.empty()) fail("expected a key");
        return k;
    }

    std::vector<std::string> key_path() {
        std::vector<std::string> path{key()};
        skip_inline_ws();
        while (peek() == '.') {
            next();
            skip_inline_ws();
            path.push_back(key());
            skip_inline_ws();
        }
        return path;
    }

    json& descend(json& from, const std::vector<std::string>& path, bool header) {
        json* cur = &from;
        for (const auto& k : path) {
            if (!cur->contains(k)) (*cur)[k] = json::object();
            cur = &(*cur)[k];
            if (!cur->is_object()) fail("key '" + k + "' is not a table");
        }
        if (header && headers_seen_.count(cur)) fail("table defined twice");
        if (header) headers_seen_[cur] = true;
        return *cur;
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = next();
            if (c == '"') break;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                char e = next();
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case 'b': out += '\b'; break;
                    case 'f': out += '\f'; break;
                    case 'u': append_utf8(out, hex_digits(4)); break;
                    case 'U': append_utf8(out, hex_digits(8)); break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    std::uint32_t hex_digits(int count) {
        std::uint32_t cp = 0;
        for (int i = 0; i < count; ++i) {
            if (eof() || !std::isxdigit(static_cast<unsigned char>(peek()))) fail("bad unicode escape");
            const char h = next();
            cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h))
                                                          ? h - '0'
                                                          : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("unicode escape is not a scalar value");
        return cp;
    }

    static void append_utf8(std::string& out, std::uint32_t cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    std::string literal_string() {
        expect('\'');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = next();
            if (c == '\'') break;
            out += c;
        }
        return out;
    }

    json value() {
        const char c = peek();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '[') return array();
        if (c == '{') return inline_table();
        return scalar();
    }

    json array() {
        expect('[');
        json arr = json::array();
        while (true) {
            skip_ws_comments_newlines();
            if (peek() == ']') {
                next();
                return arr;
            }
            arr.push_back(value());
            skip_ws_comments_newlines();
            if (peek() == ',') {
                next();
                continue;
            }
            if (peek() == ']') {
                next();
                return arr;
            }
            fail("expected ',' or ']' in array");
        }
    }

    json inline_table() {
        expect('{');
        json t = json::object();
        skip_inline_ws();
        if (peek() == '}') {
            next();
            return t;
        }
        while (true) {
            skip_inline_ws();
            auto path = key_path();
            skip_inline_ws();
            expect('=');
            skip_inline_ws();
            json v = value();
            const std::string leaf = path.back();
            path.pop_back();
            descend(t, path, false)[leaf] = std::move(v);
            skip_inline_ws();
            if (peek() == ',') {
                next();
                continue;
            }
            expect('}');
            return t;
        }
    }

    json scalar() {
        std::string tok;
        while (!eof()) {
            const char c = peek();
            if (c == ',' || c == ']' || c == '}' || c == '#' || c == '\n' || c == '\r' || c == ' ' || c == '\t') break;
            tok += next();
        }
        if (tok.empty()) fail("expected a value");
        if (tok == "true") return true;
        if (tok == "false") return false;
        if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
        if (tok == "-inf") return -std::numeric_limits<double>::infinity();
        if (tok == "nan" || tok == "+nan" || tok == "-nan") return std::numeric_limits<double>::quiet_NaN();

        std::string digits;
        for (char ch : tok)
            if (ch != '_') digits += ch;
        const bool is_float = digits.find_first_of(".eE") != std::string::npos;
        try {
            std::size_t used = 0;
            if (is_float) {
                const double d = std::stod(digits, &used);
                if (used == digits.size()) return d;
            } else {
                const long long i = std::stoll(digits, &used, 10);
                if (used == digits.size()) return i;
            }
        } catch (const std::exception&) {
        }
        fail("invalid value '" + tok + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::map<const json*, bool> headers_seen_;
};

}  // namespace

json parse(std::string_view text) { return Parser(text).document(); }

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

json parse_value(std::string_view text) { return Parser(text).single_value(); }

}  // namespace sapt::toml
