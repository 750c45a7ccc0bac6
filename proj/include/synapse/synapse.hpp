#pragma once

// Umbrella header for the inference-time neuro-symbolic decoding pipeline.

#include "synapse/concept_id.hpp"
#include "synapse/error.hpp"
#include "synapse/evaluation.hpp"
#include "synapse/exemplars.hpp"
#include "synapse/facts.hpp"
#include "synapse/knowledge_graph.hpp"
#include "synapse/latent.hpp"
#include "synapse/llm_client.hpp"
#include "synapse/pipeline.hpp"
#include "synapse/prompt.hpp"
#include "synapse/util.hpp"
