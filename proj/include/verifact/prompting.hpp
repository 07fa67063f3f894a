#pragma once

#include <map>
#include <string>
#include <vector>

#include "verifact/core.hpp"
#include "verifact/provider.hpp"

namespace verifact::prompts {

class PromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StageTemplate {
    StageTag stage_tag = StageTag::initial_cot;
    std::string system_text;
    std::string user_template;

    bool operator==(const StageTemplate&) const = default;
};

using TemplateMap = std::map<StageTag, StageTemplate>;
using PlaceholderMap = std::map<std::string, std::string>;

/// The six built-in templates, one per stage tag. Each instructs the model
/// to emit the exact fenced grammar the wire parsers expect.
const TemplateMap& default_templates();

/// Placeholder names a stage's user template must be supplied with.
const std::vector<std::string>& required_placeholders(StageTag stage);

/// Renders [system, user] messages. Pure and deterministic. Scalar
/// placeholders ({query}, {chain}, {answer}) are fence-escaped on the way
/// in; block placeholders ({claims_block}, {queries_block},
/// {evidence_block}, {retrieved_docs}) are inserted verbatim because their
/// builders already produce canonical, escaped text.
std::vector<ChatMessage> render(const StageTemplate& tpl, const PlaceholderMap& context);

/// Looks up the stage in `templates` and renders it; unknown stage errors.
std::vector<ChatMessage> render(const TemplateMap& templates, StageTag stage,
                                const PlaceholderMap& context);

/// Returns the defaults with any per-stage override files applied. An
/// override file is named <stage_tag>.txt and holds the system text, a line
/// containing only "---", then the user template.
TemplateMap load_template_dir(const std::string& dir);

}  // namespace verifact::prompts
