#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/graph.hpp"

namespace miggt::io {

/// Contiguous indices for string ids, assigned in first-appearance order.
class IdMap {
 public:
  std::size_t intern(const std::string& id) {
    const auto [it, inserted] = index_.try_emplace(id, ids_.size());
    if (inserted) ids_.push_back(id);
    return it->second;
  }

  const std::size_t* find(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &it->second;
  }

  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LoadedInteractions {
  InteractionSet interactions;
  IdMap users;
  IdMap items;
  std::size_t duplicates = 0;
};

/// Parses `user_id<TAB>item_id` lines. Blank lines and lines starting with
/// '#' are skipped; lines without a tab are split on whitespace.
inline LoadedInteractions parse_interactions(std::istream& in, const std::string& source) {
  LoadedInteractions out;
  std::set<Interaction> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string user, item;
    const auto tab = line.find('\t');
    if (tab != std::string::npos) {
      user = line.substr(0, tab);
      item = line.substr(tab + 1);
      if (item.find('\t') != std::string::npos) item.clear();
    } else {
      std::istringstream fields(line);
      std::string extra;
      fields >> user >> item;
      if (fields >> extra) item.clear();
    }
    if (user.empty() || item.empty()) {
      throw FormatError(source + ":" + std::to_string(line_no) +
                        ": expected 'user_id<TAB>item_id', got '" + line + "'");
    }
    const Interaction p{out.users.intern(user), out.items.intern(item)};
    if (seen.insert(p).second) {
      out.interactions.pairs.push_back(p);
    } else {
      ++out.duplicates;
    }
  }
  if (out.interactions.pairs.empty()) throw FormatError(source + ": no interactions");
  out.interactions.num_users = out.users.size();
  out.interactions.num_items = out.items.size();
  return out;
}

inline LoadedInteractions load_interactions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open interaction file '" + path + "'");
  return parse_interactions(in, path);
}

inline void write_interactions(const std::string& path, const InteractionSet& set,
                               const std::vector<std::string>& user_ids,
                               const std::vector<std::string>& item_ids) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& p : set.pairs) out << user_ids.at(p.user) << '\t' << item_ids.at(p.item) << '\n';
}

/// One id per line.
inline void write_id_list(const std::string& path, const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& id : ids) out << id << '\n';
}

inline std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open id list '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

}  // namespace miggt::io
