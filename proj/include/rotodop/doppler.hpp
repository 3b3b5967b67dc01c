#pragma once

#include "physics.hpp"

namespace rotodop {

// Term-by-term Doppler shift of a p = 0 LG field seen by a moving atom.
// axial carries -k V_z together with the wavefront-curvature companion;
// gouy is the (2p + |l| + 1) z_R / (z^2 + z_R^2) V_z piece.
struct DopplerBreakdown {
    double axial = 0.0;
    double radial = 0.0;
    double gouy = 0.0;
    double rotational = 0.0;
    double total = 0.0;
};

// Rotational term -(l/r) V_phi. Zero for l = 0 at any r, including r = 0.
inline double rotational_shift(int charge_l, double r, double V_phi) {
    if (charge_l == 0) return 0.0;
    if (!(r > 0.0)) throw DegenerateRadius("rotational shift: r = 0 with nonzero topological charge");
    return -(static_cast<double>(charge_l) / r) * V_phi;
}

// The axial coordinate entering the field is beam.z + kin.z: beam.z places
// the observation plane relative to the waist, kin.z offsets the atom from it.
inline DopplerBreakdown lg_doppler_shift(const BeamMode& beam, const CylKinematics& kin) {
    kin.validate();
    const double k = beam.wavenumber();
    const double zr = rayleigh_range(beam);
    const double z = beam.z + kin.z;
    const double d = z * z + zr * zr;
    const double r = kin.r;

    const double curvature = k * r * r / (2.0 * d) * (2.0 * z * z / d - 1.0);
    const double gouy_rate = (2.0 * beam.radial_p + beam.abs_charge() + 1.0) * zr / d;

    DopplerBreakdown out;
    out.axial = -(k + curvature) * kin.V_z;
    out.gouy = gouy_rate * kin.V_z;
    out.radial = -(k * r * z / d) * kin.V_R;
    out.rotational = rotational_shift(beam.charge_l, r, kin.V_phi);
    out.total = out.axial + out.radial + out.gouy + out.rotational;
    return out;
}

// Differential shift of the two fields at a common point. With the per-beam
// signs above the surviving term is ((l2 - l1)/r) V_phi; the magnitude is
// the usual |l1 - l2| V_phi / r. The sign does not affect lineshapes because
// the velocity distribution is even.
inline double rotational_detuning(int l1, int l2, double r, double V_phi) {
    if (l1 == l2) return 0.0;
    if (!(r > 0.0)) throw DegenerateRadius("two-photon detuning: r = 0 with unequal charges");
    return (static_cast<double>(l2 - l1) / r) * V_phi;
}

// delta' = delta_LG(beam1) - delta_LG(beam2). The difference is formed term
// by term so that contributions shared by both fields cancel exactly instead
// of leaving rounding residue of the (much larger) axial shift.
inline double two_photon_detuning(const BeamMode& beam1, const BeamMode& beam2, const CylKinematics& kin) {
    if (beam1.wavelength != beam2.wavelength)
        throw InvalidArgument("two-photon detuning: beams must share the wavelength");
    const DopplerBreakdown a = lg_doppler_shift(beam1, kin);
    const DopplerBreakdown b = lg_doppler_shift(beam2, kin);
    return (a.axial - b.axial) + (a.radial - b.radial) + (a.gouy - b.gouy) + (a.rotational - b.rotational);
}

} // namespace rotodop
