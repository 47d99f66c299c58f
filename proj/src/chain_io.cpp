#include "ctmix/chain_io.hpp"

#include <fstream>
#include <sstream>

#include "ctmix/errors.hpp"

namespace ctmix {
namespace {

// nlohmann reports byte offsets; errors cite 1-based lines instead.
std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

[[noreturn]] void bad_field(const std::string& where, const std::string& what) {
  fail(Errc::parse_error, where + ": " + what);
}

} // namespace

ChainSpec chain_from_json(const std::string& text, ChainSpec::Connectivity conn) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::parse_error,
         "line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) bad_field("document", "expected a JSON object");
  if (!doc.contains("states")) bad_field("document", "missing field \"states\"");
  if (!doc.contains("rates")) bad_field("document", "missing field \"rates\"");

  const auto& js = doc["states"];
  if (!js.is_array()) bad_field("states", "expected an array of labels");
  std::vector<std::string> labels;
  labels.reserve(js.size());
  for (std::size_t i = 0; i < js.size(); ++i) {
    if (!js[i].is_string())
      bad_field("states[" + std::to_string(i) + "]", "expected a string label");
    labels.push_back(js[i].get<std::string>());
  }

  const auto& jr = doc["rates"];
  if (!jr.is_array()) bad_field("rates", "expected an array of [i, j, rate] triples");
  std::vector<RateEntry> entries;
  entries.reserve(jr.size());
  for (std::size_t k = 0; k < jr.size(); ++k) {
    const auto& row = jr[k];
    const std::string where = "rates[" + std::to_string(k) + "]";
    if (!row.is_array() || row.size() != 3)
      bad_field(where, "expected a [from, to, rate] triple");
    if (!row[0].is_number_integer() || !row[1].is_number_integer())
      bad_field(where, "state indices must be integers");
    if (!row[2].is_number()) bad_field(where, "rate must be a number");
    entries.push_back(RateEntry{row[0].get<int>(), row[1].get<int>(),
                                row[2].get<double>()});
  }

  // Read the size before the move: argument evaluation order is unspecified.
  const int states = static_cast<int>(labels.size());
  return ChainSpec(states, std::move(entries), conn, std::move(labels));
}

ChainSpec chain_from_json_file(const std::string& path, ChainSpec::Connectivity conn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::parse_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return chain_from_json(buf.str(), conn);
  } catch (const Error& e) {
    // Re-wrap with the file path; what() carries an "ErrName: " prefix that
    // the Error constructor would otherwise duplicate.
    std::string msg = e.what();
    std::string prefix = std::string(errc_name(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw Error(e.code(), path + ": " + msg);
  }
}

nlohmann::ordered_json chain_to_json(const ChainSpec& chain) {
  nlohmann::ordered_json doc;
  doc["states"] = chain.labels();
  auto rates = nlohmann::ordered_json::array();
  for (const auto& e : chain.rate_entries())
    rates.push_back({e.from, e.to, e.rate});
  doc["rates"] = std::move(rates);
  return doc;
}

void write_chain_json(const ChainSpec& chain, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::parse_error, "cannot open " + path + " for writing");
  out << chain_to_json(chain).dump(2) << '\n';
}

} // namespace ctmix
