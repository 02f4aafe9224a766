#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace combfit::pulse {

using complex = std::complex<double>;

// One period of a pulse train: E(t) = A(t) C(t) + c.c. with the periodic
// complex envelope A(t) = A(t - T) and the carrier C(t) = exp(-i(2 pi f_c t + phi0)).
//
// Simulations run in dimensionless units by default (T = 1, frequencies in
// units of the repetition rate). time_unit_s maps one simulation time unit to
// seconds for SI output and for the Kerr phase.
struct PulseTrain {
  std::vector<complex> envelope;  // S samples over one period
  double period = 1.0;
  double carrier_frequency = 0.0;
  double carrier_phase = 0.0;
  double time_unit_s = 1.0;

  std::size_t samples_per_period() const { return envelope.size(); }
  double sample_rate() const { return static_cast<double>(envelope.size()) / period; }
  // Throws domain_error unless S is a power of two >= 256, T > 0 and f_c is
  // below the Nyquist frequency S / (2T).
  void validate() const;
};

struct GaussianPulse {
  std::size_t samples = 4096;
  double period = 1.0;
  double fwhm = 0.02;    // intensity FWHM, same units as period
  double center = 0.5;   // pulse centre within the period
  double amplitude = 1.0;
  double chirp = 0.0;    // quadratic envelope phase, rad per (time unit)^2
  double carrier_frequency = 0.0;
  double carrier_phase = 0.0;
  double time_unit_s = 1.0;
};

// Periodized Gaussian envelope (neighbouring images included).
PulseTrain make_gaussian_train(const GaussianPulse& p);

// 2 pi (f_c T mod 1), in [0, 2 pi).
double carrier_envelope_phase_slip(const PulseTrain& train);

struct SampledField {
  std::vector<double> samples;
  double sample_rate = 0.0;
  double period = 0.0;
  double time_unit_s = 1.0;
  double phase_slip = 0.0;  // carrier-envelope phase shift per pulse
};

// Real field over `periods` repetitions with a continuously advancing carrier.
SampledField synthesize(const PulseTrain& train, int periods);

// Unnormalized forward DFT, X_k = sum_j x_j exp(-2 pi i jk/N), bins 0..N/2.
std::vector<complex> real_dft(const std::vector<double>& samples);

struct CombLine {
  long mode = 0;
  double frequency = 0.0;  // simulation units
  complex amplitude;       // X_k / N at the peak bin
  double power() const { return std::norm(amplitude); }
};

// Detected comb lines plus the least-squares comb fit
// frequency = mode * f_rep + f_ceo, with 0 <= f_ceo < f_rep.
struct CombSpectrum {
  std::vector<CombLine> lines;  // ascending frequency
  double f_rep = 0.0;
  double f_ceo = 0.0;
  double resolution = 0.0;      // DFT bin spacing
  double time_unit_s = 1.0;
};

struct SpectrumOptions {
  double prune_floor = 1e-12;   // relative to the strongest line power
};

// Throws domain_error if the field does not span an integer number of periods.
CombSpectrum spectrum(const SampledField& field, const SpectrumOptions& options = {});

struct KerrMedium {
  double n2 = 0.0;              // m^2/W
  double length = 0.0;          // m
  double effective_area = 1.0;  // m^2
};

// Phi_NL(t) = -n2 I(t) omega_c L / c with I(t) = |A(t)|^2 peak_power / area.
std::vector<double> nonlinear_phase(const PulseTrain& train, const KerrMedium& medium, double peak_power);
double peak_nonlinear_phase(const PulseTrain& train, const KerrMedium& medium, double peak_power);

// Pure self-phase modulation, A(t) -> A(t) exp(i Phi_NL(t)).
PulseTrain apply_spm(const PulseTrain& train, const KerrMedium& medium, double peak_power);

struct F2fResult {
  double offset = 0.0;      // consensus 2 f_n - f_2n (median over pairs)
  std::size_t pairs = 0;
  double spread = 0.0;      // max deviation of a single pair from the consensus
};

// Self-referencing beat 2 f_n - f_2n over every available (n, 2n) pair.
// Throws domain_error("octave required") for sub-octave combs.
F2fResult f_2f_offset(const CombSpectrum& comb);

// Outermost span of lines within 3 dB of the strongest line.
double spectral_width_3db(const CombSpectrum& comb);

// CSV columns frequency_hz,power_db,phase_rad; power relative to the peak.
void write_spectrum_csv(std::ostream& out, const CombSpectrum& comb);

}  // namespace combfit::pulse
