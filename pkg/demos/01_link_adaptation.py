"""Walk through the PU link model: the ACM ladder, SINR, and the derived
interference thresholds that the secondary network implicitly probes."""

import numpy as np

from crnpc import AcmProtocol, ScenarioConfig, interference_thresholds, pu_sinr, select_mcs
from crnpc.constraints import gamma_ratios, threshold_ratios
from crnpc.pu_link import dbm_to_mw
from crnpc.scenario import Topology

cfg = ScenarioConfig()
proto = cfg.protocol

print("ACM ladder (index, label, minimum SINR):")
for e in proto.entries:
    print(f"  {e.index}  {e.label:<10} {e.gamma_db:5.1f} dB")

print(f"\nClear channel: SINR {cfg.pu_clear_sinr_db} dB over noise "
      f"{cfg.pu_noise_dbm} dBm -> received power {cfg.received_pu_power_dbm} dBm")
print(f"Reference MCS held with no interference: {proto.label(cfg.reference_index)}")

i_th = interference_thresholds(proto, cfg.received_pu_power_dbm, cfg.pu_noise_dbm)
plain = gamma_ratios(proto, cfg.reference_index)
exact = threshold_ratios(proto, cfg.received_pu_power_dbm, cfg.pu_noise_dbm,
                         cfg.reference_index)
print("\nPer-MCS interference budget and threshold ratios:")
print(f"  {'MCS':<10} {'I_th dBm':>9}  {'gamma ratio':>11}  {'exact ratio':>11}")
for e in proto.entries:
    print(f"  {e.label:<10} {i_th[e.index-1]:9.2f}  {plain.ratio(e.index):11.4f}"
          f"  {exact.ratio(e.index):11.4f}")
print("(the gamma ratios ignore receiver noise; the simulator uses the exact ones)")

# One SU at 1 km: full power parked right at the reference threshold.
topo = Topology(su_pu_dist_m=np.array([1000.0]), g=np.array([1e-12]),
                h=np.array([1e-9]), received_pu_power_dbm=cfg.received_pu_power_dbm,
                pu_noise_dbm=cfg.pu_noise_dbm)
print("\nSweeping one SU at 1 km from silence to full power (23 dBm):")
for p_dbm in (0, 10, 17, 20, 23, 26, 30):
    p = np.array([dbm_to_mw(p_dbm)])
    sinr = pu_sinr(topo, p)
    mcs = select_mcs(sinr, proto)
    label = proto.label(mcs) if mcs else "OUTAGE"
    print(f"  p = {p_dbm:3d} dBm -> SINR {sinr:6.2f} dB -> {label}")
