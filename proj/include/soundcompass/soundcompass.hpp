// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "soundcompass/audio_io.hpp"
#include "soundcompass/band_layout.hpp"
#include "soundcompass/beamformer.hpp"
#include "soundcompass/clue.hpp"
#include "soundcompass/dsp.hpp"
#include "soundcompass/error.hpp"
#include "soundcompass/fft.hpp"
#include "soundcompass/fusion.hpp"
#include "soundcompass/fusion_check.hpp"
#include "soundcompass/fusion_io.hpp"
#include "soundcompass/metrics.hpp"
#include "soundcompass/parallel.hpp"
#include "soundcompass/roomsim.hpp"
#include "soundcompass/scene.hpp"
#include "soundcompass/spectral.hpp"
#include "soundcompass/spin.hpp"
#include "soundcompass/tensor.hpp"
#include "soundcompass/waveform.hpp"
