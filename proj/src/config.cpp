#include "symcon/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace symcon::minitoml {

namespace {

[[noreturn]] void fail(const std::string& file, int line, const std::string& msg) {
  throw ConfigError(file + ":" + std::to_string(line) + ": " + msg);
}

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;
  int line = 1;
  std::string file;

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  char take() {
    const char c = s[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
  [[noreturn]] void die(const std::string& msg) const { fail(file, line, msg); }
};

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_key(Cursor& c) {
  c.skip_ws_inline();
  if (c.eof()) c.die("expected key");
  if (c.peek() == '"') {
    c.take();
    std::string k;
    while (!c.eof() && c.peek() != '"') k += c.take();
    if (c.eof()) c.die("unterminated quoted key");
    c.take();
    return k;
  }
  std::string k;
  while (!c.eof() && is_bare_key_char(c.peek())) k += c.take();
  if (k.empty()) c.die("expected key");
  return k;
}

Value parse_value(Cursor& c);

Value parse_string(Cursor& c) {
  Value v;
  v.line = c.line;
  c.take();  // opening quote
  std::string out;
  while (true) {
    if (c.eof()) c.die("unterminated string");
    char ch = c.take();
    if (ch == '"') break;
    if (ch == '\\') {
      if (c.eof()) c.die("unterminated escape");
      const char e = c.take();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: c.die(std::string("unsupported escape \\") + e);
      }
      continue;
    }
    if (ch == '\n') c.die("newline in string");
    out += ch;
  }
  v.data = std::move(out);
  return v;
}

Value parse_number(Cursor& c) {
  Value v;
  v.line = c.line;
  std::string tok;
  while (!c.eof() && (std::isdigit(static_cast<unsigned char>(c.peek())) || c.peek() == '+' ||
                      c.peek() == '-' || c.peek() == '.' || c.peek() == 'e' || c.peek() == 'E' ||
                      c.peek() == 'i' || c.peek() == 'n' || c.peek() == 'f' || c.peek() == 'a'))
    tok += c.take();
  if (tok.empty()) c.die("expected value");
  const bool is_float = tok.find_first_of(".eE") != std::string::npos ||
                        tok.find("inf") != std::string::npos || tok.find("nan") != std::string::npos;
  errno = 0;
  char* end = nullptr;
  if (is_float) {
    const double d = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) c.die("malformed number '" + tok + "'");
    v.data = d;
  } else {
    const long long i = std::strtoll(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size()) c.die("malformed integer '" + tok + "'");
    v.data = static_cast<std::int64_t>(i);
  }
  if (errno == ERANGE) c.die("number out of range '" + tok + "'");
  return v;
}

Value parse_array(Cursor& c) {
  Value v;
  v.line = c.line;
  Value::Array arr;
  c.take();  // [
  while (true) {
    c.skip_ws_inline();
    if (c.eof()) c.die("unterminated array");
    if (c.peek() == ']') {
      c.take();
      break;
    }
    arr.push_back(parse_value(c));
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == ',') {
      c.take();
      continue;
    }
    c.skip_ws_inline();
    if (c.eof() || c.peek() != ']') c.die("expected ',' or ']' in array");
    c.take();
    break;
  }
  v.data = std::move(arr);
  return v;
}

Value parse_inline_table(Cursor& c) {
  Value v;
  v.line = c.line;
  Value::Table t;
  c.take();  // {
  c.skip_ws_inline();
  if (!c.eof() && c.peek() == '}') {
    c.take();
    v.data = std::move(t);
    return v;
  }
  while (true) {
    const std::string key = parse_key(c);
    c.skip_ws_inline();
    if (c.eof() || c.take() != '=') c.die("expected '=' in inline table");
    c.skip_ws_inline();
    if (t.count(key)) c.die("duplicate key '" + key + "'");
    t.emplace(key, parse_value(c));
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == ',') {
      c.take();
      c.skip_ws_inline();
      continue;
    }
    if (c.eof() || c.peek() != '}') c.die("expected ',' or '}' in inline table");
    c.take();
    break;
  }
  v.data = std::move(t);
  return v;
}

Value parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (c.eof()) c.die("expected value");
  const char ch = c.peek();
  if (ch == '"') return parse_string(c);
  if (ch == '[') return parse_array(c);
  if (ch == '{') return parse_inline_table(c);
  if (std::isalpha(static_cast<unsigned char>(ch)) && ch != 'i' && ch != 'n') {
    // true/false
    std::string tok;
    Value v;
    v.line = c.line;
    while (!c.eof() && std::isalpha(static_cast<unsigned char>(c.peek()))) tok += c.take();
    if (tok == "true") {
      v.data = true;
      return v;
    }
    if (tok == "false") {
      v.data = false;
      return v;
    }
    c.die("unexpected token '" + tok + "'");
  }
  return parse_number(c);
}

std::vector<std::string> parse_header_path(Cursor& c) {
  std::vector<std::string> path;
  while (true) {
    path.push_back(parse_key(c));
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == '.') {
      c.take();
      continue;
    }
    break;
  }
  return path;
}

Value::Table* navigate(Value::Table* root, const std::vector<std::string>& path, bool array_leaf,
                       const std::string& file, int line) {
  Value::Table* t = root;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const bool leaf = i + 1 == path.size();
    auto it = t->find(path[i]);
    if (it == t->end()) {
      Value v;
      v.line = line;
      if (leaf && array_leaf) {
        Value::Array arr;
        Value elem;
        elem.line = line;
        elem.data = Value::Table{};
        arr.push_back(std::move(elem));
        v.data = std::move(arr);
        it = t->emplace(path[i], std::move(v)).first;
        return &std::get<Value::Table>(std::get<Value::Array>(it->second.data).back().data);
      }
      v.data = Value::Table{};
      it = t->emplace(path[i], std::move(v)).first;
      t = &std::get<Value::Table>(it->second.data);
      continue;
    }
    if (leaf && array_leaf) {
      if (!it->second.is_array()) fail(file, line, "'" + path[i] + "' is not an array of tables");
      auto& arr = std::get<Value::Array>(it->second.data);
      Value elem;
      elem.line = line;
      elem.data = Value::Table{};
      arr.push_back(std::move(elem));
      return &std::get<Value::Table>(arr.back().data);
    }
    if (it->second.is_table()) {
      t = &std::get<Value::Table>(it->second.data);
    } else if (it->second.is_array()) {
      auto& arr = std::get<Value::Array>(it->second.data);
      if (arr.empty() || !arr.back().is_table())
        fail(file, line, "'" + path[i] + "' is not a table");
      t = &std::get<Value::Table>(arr.back().data);
    } else {
      fail(file, line, "'" + path[i] + "' is not a table");
    }
  }
  return t;
}

}  // namespace

const Value::Table& Value::table() const {
  if (!is_table()) throw ConfigError("value at line " + std::to_string(line) + " is not a table");
  return std::get<Table>(data);
}
const Value::Array& Value::array() const {
  if (!is_array()) throw ConfigError("value at line " + std::to_string(line) + " is not an array");
  return std::get<Array>(data);
}
const std::string& Value::string() const {
  if (!is_string()) throw ConfigError("value at line " + std::to_string(line) + " is not a string");
  return std::get<std::string>(data);
}
bool Value::boolean() const {
  if (!is_bool()) throw ConfigError("value at line " + std::to_string(line) + " is not a boolean");
  return std::get<bool>(data);
}
std::int64_t Value::integer() const {
  if (!is_int()) throw ConfigError("value at line " + std::to_string(line) + " is not an integer");
  return std::get<std::int64_t>(data);
}
double Value::number() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(data));
  if (!std::holds_alternative<double>(data))
    throw ConfigError("value at line " + std::to_string(line) + " is not a number");
  return std::get<double>(data);
}

Value parse(std::string_view text, const std::string& filename) {
  Value root;
  root.line = 1;
  root.data = Value::Table{};
  auto* root_table = &std::get<Value::Table>(root.data);
  Value::Table* current = root_table;

  Cursor c{text, 0, 1, filename};
  while (!c.eof()) {
    c.skip_ws_inline();
    if (c.eof()) break;
    const char ch = c.peek();
    if (ch == '\n') {
      c.take();
      continue;
    }
    if (ch == '#') {
      while (!c.eof() && c.peek() != '\n') c.take();
      continue;
    }
    if (ch == '[') {
      const int line = c.line;
      c.take();
      const bool array_header = !c.eof() && c.peek() == '[';
      if (array_header) c.take();
      const auto path = parse_header_path(c);
      c.skip_ws_inline();
      if (c.eof() || c.take() != ']') c.die("expected ']' in table header");
      if (array_header && (c.eof() || c.take() != ']')) c.die("expected ']]' in table header");
      current = navigate(root_table, path, array_header, filename, line);
      continue;
    }
    const int line = c.line;
    const std::string key = parse_key(c);
    c.skip_ws_inline();
    if (c.eof() || c.take() != '=') fail(filename, line, "expected '=' after key '" + key + "'");
    Value v = parse_value(c);
    v.line = line;
    if (current->count(key)) fail(filename, line, "duplicate key '" + key + "'");
    current->emplace(key, std::move(v));
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == '#')
      while (!c.eof() && c.peek() != '\n') c.take();
    if (!c.eof() && c.peek() != '\n') c.die("trailing characters after value for key '" + key + "'");
  }
  return root;
}

Value parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return parse(text, path);
}

TableReader::TableReader(const Value& v, std::string path, std::string file)
    : v_(&v), path_(std::move(path)), file_(std::move(file)) {
  if (!v.is_table())
    throw ConfigError(file_ + ":" + std::to_string(v.line) + ": '" + path_ + "' must be a table");
}

bool TableReader::has(const std::string& key) const { return v_->table().count(key) > 0; }

std::string TableReader::where(const std::string& key) const {
  return file_ + ": " + (path_.empty() ? key : path_ + "." + key);
}

const Value& TableReader::get(const std::string& key) {
  const auto& t = v_->table();
  auto it = t.find(key);
  if (it == t.end()) throw ConfigError(where(key) + ": required key missing");
  used_.insert(key);
  return it->second;
}

const Value* TableReader::get_optional(const std::string& key) {
  const auto& t = v_->table();
  auto it = t.find(key);
  if (it == t.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

std::string TableReader::get_string(const std::string& key) { return get(key).string(); }
bool TableReader::get_bool(const std::string& key, bool fallback) {
  const Value* v = get_optional(key);
  return v ? v->boolean() : fallback;
}
std::int64_t TableReader::get_int(const std::string& key) { return get(key).integer(); }
std::int64_t TableReader::get_int(const std::string& key, std::int64_t fallback) {
  const Value* v = get_optional(key);
  return v ? v->integer() : fallback;
}
double TableReader::get_double(const std::string& key) { return get(key).number(); }
double TableReader::get_double(const std::string& key, double fallback) {
  const Value* v = get_optional(key);
  return v ? v->number() : fallback;
}
Vec TableReader::get_vec(const std::string& key) { return value_to_vec(get(key), where(key)); }
Mat TableReader::get_mat(const std::string& key) { return value_to_mat(get(key), where(key)); }
std::vector<int> TableReader::get_int_list(const std::string& key) {
  const Value& v = get(key);
  std::vector<int> out;
  for (const auto& e : v.array()) out.push_back(static_cast<int>(e.integer()));
  return out;
}

void TableReader::done() const {
  for (const auto& [key, value] : v_->table())
    if (!used_.count(key))
      throw ConfigError(file_ + ":" + std::to_string(value.line) + ": unknown key '" +
                        (path_.empty() ? key : path_ + "." + key) + "'");
}

Vec value_to_vec(const Value& v, const std::string& where) {
  const auto& arr = v.array();
  Vec out(static_cast<long>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: not a number");
    out[static_cast<long>(i)] = arr[i].number();
  }
  return out;
}

Mat value_to_mat(const Value& v, const std::string& where) {
  const auto& rows = v.array();
  if (rows.empty()) throw ConfigError(where + ": empty matrix");
  const std::size_t cols = rows[0].array().size();
  Mat out(static_cast<long>(rows.size()), static_cast<long>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r].array();
    if (row.size() != cols) throw ConfigError(where + ": ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw ConfigError(where + "[" + std::to_string(r) + "][" + std::to_string(c) +
                          "]: not a number");
      out(static_cast<long>(r), static_cast<long>(c)) = row[c].number();
    }
  }
  return out;
}

}  // namespace symcon::minitoml
