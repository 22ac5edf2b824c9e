#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "symcon/util.hpp"

namespace symcon::minitoml {

/* Strict TOML subset: tables, array-of-tables, inline tables, single-line
 * arrays (nestable), basic strings, integers, floats, booleans, # comments.
 * Grammar documented in docs/problem_format.md. */
class Value {
public:
  using Array = std::vector<Value>;
  using Table = std::map<std::string, Value>;
  using Data = std::variant<std::int64_t, double, bool, std::string, Array, Table>;

  Data data;
  int line = 0;

  bool is_table() const { return std::holds_alternative<Table>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_number() const { return is_int() || std::holds_alternative<double>(data); }

  const Table& table() const;
  const Array& array() const;
  const std::string& string() const;
  bool boolean() const;
  std::int64_t integer() const;
  double number() const;  // int promotes
};

Value parse(std::string_view text, const std::string& filename);
Value parse_file(const std::string& path);

/* Strict-schema accessor: every key must be consumed; done() rejects
 * leftovers with their location. */
class TableReader {
public:
  TableReader(const Value& v, std::string path, std::string file);

  bool has(const std::string& key) const;
  const Value& get(const std::string& key);
  const Value* get_optional(const std::string& key);

  std::string get_string(const std::string& key);
  bool get_bool(const std::string& key, bool fallback);
  std::int64_t get_int(const std::string& key);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  Vec get_vec(const std::string& key);
  Mat get_mat(const std::string& key);
  std::vector<int> get_int_list(const std::string& key);

  std::string where(const std::string& key) const;
  void done() const;

private:
  const Value* v_;
  std::string path_, file_;
  std::set<std::string> used_;
};

Vec value_to_vec(const Value& v, const std::string& where);
Mat value_to_mat(const Value& v, const std::string& where);

}  // namespace symcon::minitoml
