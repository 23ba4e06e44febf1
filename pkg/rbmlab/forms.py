from django import forms

MAX_SEED = 2 ** 64 - 1


class FloatListField(forms.Field):
    """Accepts a comma-separated string or a list of numbers."""

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if isinstance(value, str):
            value = [part for part in value.split(',') if part.strip()]
        try:
            return [float(item) for item in value]
        except (TypeError, ValueError):
            raise forms.ValidationError('Enter a comma-separated list of numbers.')

    def validate(self, value):
        super().validate(value)
        if self.required and not value:
            raise forms.ValidationError('Enter at least one value.')


class ExperimentConfigForm(forms.Form):
    """
    Fields shared by every mode. Subclasses add the numeric parameters of
    their mode and list defaults for the optional ones in `defaults`.
    """
    mode = None
    defaults = {}

    seed = forms.IntegerField(min_value=0, max_value=MAX_SEED)
    streams = forms.IntegerField(min_value=1, max_value=4096)
    out = forms.CharField(max_length=500)

    def __init__(self, data=None, *args, **kwargs):
        merged = {'seed': 0, 'streams': 1, 'out': self.mode}
        merged.update(self.defaults)
        merged.update({k: v for k, v in (data or {}).items() if v is not None})
        super().__init__(merged, *args, **kwargs)

    def _clean_energy(self, name='e'):
        e = self.cleaned_data.get(name)
        if e is not None and not abs(e) < 2:
            raise forms.ValidationError('The spectral center must lie strictly inside (-2, 2).')
        return e

    def params(self):
        """Mode parameters only, without seed, streams and out."""
        shared = {'seed', 'streams', 'out'}
        return {k: v for k, v in self.cleaned_data.items() if k not in shared}


class CovarianceForm(ExperimentConfigForm):
    mode = 'covariance'

    n = forms.IntegerField(min_value=1)
    w = forms.FloatField(min_value=1.0)


class SampleForm(ExperimentConfigForm):
    mode = 'sample'
    defaults = {'count': 1}

    n = forms.IntegerField(min_value=1)
    w = forms.FloatField(min_value=1.0)
    count = forms.IntegerField(min_value=1)


class McF2Form(ExperimentConfigForm):
    mode = 'mc-f2'
    defaults = {'e': 0.0}

    n = forms.IntegerField(min_value=1)
    w = forms.FloatField(min_value=1.0)
    e = forms.FloatField()
    xi = FloatListField()
    samples = forms.IntegerField(min_value=100)

    def clean_e(self):
        return self._clean_energy()


class LimitForm(ExperimentConfigForm):
    mode = 'limit'
    defaults = {'e': 0.0, 'L': 16}

    cstar = forms.FloatField(min_value=0.0)
    e = forms.FloatField()
    xi_list = FloatListField()
    L = forms.IntegerField(min_value=8, max_value=256)

    def clean_e(self):
        return self._clean_energy()


class KStarSpectrumForm(ExperimentConfigForm):
    mode = 'kstar-spectrum'
    defaults = {'quad_order': None}

    t = forms.FloatField()
    w = forms.FloatField(min_value=1.0)
    jmax = forms.IntegerField(min_value=0)
    quad_order = forms.IntegerField(min_value=1, required=False)

    def clean_t(self):
        t = self.cleaned_data.get('t')
        if t is not None and not t > 0:
            raise forms.ValidationError('t must be positive.')
        return t


class CrossoverScanForm(ExperimentConfigForm):
    mode = 'crossover-scan'
    defaults = {'e': 0.0, 'L': 16}

    xi = forms.FloatField()
    e = forms.FloatField()
    cstar_min = forms.FloatField()
    cstar_max = forms.FloatField()
    points = forms.IntegerField(min_value=1, max_value=10000)
    L = forms.IntegerField(min_value=8, max_value=256)

    def clean_e(self):
        return self._clean_energy()

    def clean(self):
        cleaned_data = super().clean()
        low, high = cleaned_data.get('cstar_min'), cleaned_data.get('cstar_max')
        if low is not None and high is not None and not 0 < low <= high:
            raise forms.ValidationError('Need 0 < cstar_min <= cstar_max.')
        return cleaned_data


class CompareForm(ExperimentConfigForm):
    mode = 'compare'
    defaults = {'e': 0.0, 'cstar': 1.0}

    w = forms.FloatField(min_value=1.0)
    cstar = forms.FloatField()
    e = forms.FloatField()
    xi_list = FloatListField()
    samples = forms.IntegerField(min_value=100)

    def clean_e(self):
        return self._clean_energy()

    def clean_cstar(self):
        cstar = self.cleaned_data.get('cstar')
        if cstar is not None and not cstar > 0:
            raise forms.ValidationError('cstar must be positive.')
        return cstar

    def clean(self):
        cleaned_data = super().clean()
        w, cstar = cleaned_data.get('w'), cleaned_data.get('cstar')
        if w is not None and cstar is not None and round(cstar * w * w) < 8:
            raise forms.ValidationError('cstar * w^2 must round to at least 8 sites.')
        return cleaned_data


class DiagnosticsForm(ExperimentConfigForm):
    mode = 'diagnostics'
    defaults = {'e': 0.0, 'half_width': 3.0, 'nodes': None}

    e = forms.FloatField()
    w = forms.FloatField(min_value=1.0)
    half_width = forms.FloatField(min_value=1.0)
    nodes = forms.IntegerField(min_value=200, required=False)

    def clean_e(self):
        return self._clean_energy()


MODE_FORMS = {
    form.mode: form
    for form in (
        CovarianceForm, SampleForm, McF2Form, LimitForm,
        KStarSpectrumForm, CrossoverScanForm, CompareForm, DiagnosticsForm,
    )
}
