# Log-log plot of sweep_eta.csv: max stable-bundle angle against eta.
import csv, sys
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else 'sweep_eta.csv'
rows = [r for r in csv.DictReader(open(path)) if float(r['max_stable_angle']) > 0]
eta = [float(r['eta']) for r in rows]
ang = [float(r['max_stable_angle']) for r in rows]
plt.loglog(eta, ang, 'o-', label='max angle')
if eta:
    plt.loglog(eta, [ang[0] * eta[0] / e for e in eta], '--', label='slope -1')
plt.xlabel('eta')
plt.ylabel('angle to horizontal')
plt.legend()
plt.savefig(path.rsplit('.', 1)[0] + '.png', dpi=120)
