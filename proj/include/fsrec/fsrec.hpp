#pragma once

#include "fsrec/adam.hpp"
#include "fsrec/autoencoder.hpp"
#include "fsrec/checkpoint.hpp"
#include "fsrec/config.hpp"
#include "fsrec/dataset.hpp"
#include "fsrec/decode.hpp"
#include "fsrec/errors.hpp"
#include "fsrec/export.hpp"
#include "fsrec/glyphs.hpp"
#include "fsrec/gradcheck.hpp"
#include "fsrec/gradsuite.hpp"
#include "fsrec/image.hpp"
#include "fsrec/init.hpp"
#include "fsrec/metrics.hpp"
#include "fsrec/model.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/seq2seq.hpp"
#include "fsrec/splits.hpp"
#include "fsrec/synth.hpp"
#include "fsrec/tape.hpp"
#include "fsrec/tensor.hpp"
#include "fsrec/trainer.hpp"
#include "fsrec/vocab.hpp"
