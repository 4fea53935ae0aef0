#include <algorithm>
#include <json.hpp>

#include "wr/syntax.hpp"

namespace wr {

using nlohmann::json;

namespace {

std::vector<std::string> Names(const VarSet& s) {
  std::vector<std::string> out;
  for (Var v : s) out.push_back(v.name());
  std::sort(out.begin(), out.end());
  return out;
}

VarSet FromNames(const json& j) {
  VarSet out;
  for (const auto& n : j) out.insert(Var::Intern(n.get<std::string>()));
  return out;
}

json RecJson(const CompRec& rec) {
  json regrec = json::object();
  for (const auto& [r, e] : rec.regrec) regrec["r" + std::to_string(r)] = ToString(*e);
  return json{{"regrec", regrec},
              {"asm_no_write", Names(rec.asmrec.no_write)},
              {"asm_no_read_write", Names(rec.asmrec.no_read_write)}};
}

CompRec RecFromJson(const json& j) {
  CompRec rec;
  for (const auto& [key, text] : j.at("regrec").items()) {
    if (key.size() < 2 || key[0] != 'r') throw std::runtime_error("bad register key '" + key + "'");
    rec.regrec[static_cast<Reg>(std::stoul(key.substr(1)))] = ParseExpr(text.get<std::string>());
  }
  rec.asmrec.no_write = FromNames(j.at("asm_no_write"));
  rec.asmrec.no_read_write = FromNames(j.at("asm_no_read_write"));
  return rec;
}

std::vector<const Cmd*> Preorder(const CmdPtr& src) {
  std::vector<const Cmd*> out;
  ForEachCmd(src, [&](const CmdPtr& c) { out.push_back(c.get()); });
  return out;
}

}  // namespace

std::string WriteAnnotations(const CompileOutput& out, const CmdPtr& src) {
  if (out.failed) throw std::runtime_error("cannot annotate a failed compilation");
  std::vector<const Cmd*> order = Preorder(src);
  std::string text;
  for (std::size_t pc = 0; pc < out.code.size(); ++pc) {
    const AnnotatedInstr& a = out.code[pc];
    json line = RecJson(a.rec);
    line["pc"] = pc;
    line["instr"] = ToAsm(a.instr.body);
    line["label"] = a.instr.label ? json(*a.instr.label) : json(nullptr);
    line["phase"] = PhaseName(a.phase);
    auto it = std::find(order.begin(), order.end(), a.origin);
    line["origin"] = it == order.end() ? json(nullptr) : json(it - order.begin());
    text += line.dump() + "\n";
  }
  json summary = RecJson(out.final_rec);
  summary["summary"] = true;
  summary["exit_label"] = out.exit_label ? json(*out.exit_label) : json(nullptr);
  summary["next_label"] = out.next_label;
  text += summary.dump() + "\n";
  return text;
}

CompileOutput ReadAnnotations(std::string_view text, const CmdPtr& src) {
  std::vector<const Cmd*> order = Preorder(src);
  CompileOutput out;
  bool have_summary = false;
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      json j = json::parse(line);
      if (have_summary) throw std::runtime_error("record after the summary line");
      if (j.value("summary", false)) {
        out.final_rec = RecFromJson(j);
        if (!j.at("exit_label").is_null()) out.exit_label = j.at("exit_label").get<Label>();
        out.next_label = j.at("next_label").get<Label>();
        have_summary = true;
        continue;
      }
      if (j.at("pc").get<std::size_t>() != out.code.size()) {
        throw std::runtime_error("records out of order");
      }
      AnnotatedInstr a;
      a.instr = ParseInstruction(j.at("instr").get<std::string>(), line_no);
      if (!j.at("label").is_null()) a.instr.label = j.at("label").get<Label>();
      auto phase = PhaseFromName(j.at("phase").get<std::string>());
      if (!phase) throw std::runtime_error("unknown phase");
      a.phase = *phase;
      if (!j.at("origin").is_null()) {
        auto index = j.at("origin").get<std::size_t>();
        if (index >= order.size()) throw std::runtime_error("origin outside the source program");
        a.origin = order[index];
      }
      a.rec = RecFromJson(j);
      out.code.push_back(std::move(a));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, 1, std::string("annotation: ") + e.what());
    }
  }
  if (!have_summary) throw ParseError(line_no, 1, "annotation: missing summary line");
  return out;
}

}  // namespace wr
