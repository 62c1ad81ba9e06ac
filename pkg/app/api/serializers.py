from rest_framework import serializers

from .caching.config import COMPONENTS, SCHEMES, build_scheme, default_seed, setting
from .caching.errors import PrivCacheError
from .models import AuditRun

MODES = ("exact", "rank", "aux", "statistical")
PARAM_FIELDS = ('n', 'k', 'r', 'alpha', 'first', 'second', 'first_r', 'second_r', 'subfile_bytes',
                'demand', 'colluders', 'zero_library')


class RunConfigSerializer(serializers.Serializer):
    """
    Validates a flat RunConfig. Scheme constraints (e.g. mds-b needs K >= N >= 3)
    are checked by instantiating the scheme.
    """
    scheme = serializers.ChoiceField(choices=SCHEMES)
    n = serializers.IntegerField(min_value=1)
    k = serializers.IntegerField(min_value=1)
    r = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    alpha = serializers.CharField(required=False, allow_null=True)
    first = serializers.ChoiceField(choices=COMPONENTS, required=False, allow_null=True)
    second = serializers.ChoiceField(choices=COMPONENTS, required=False, allow_null=True)
    first_r = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    second_r = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    subfile_bytes = serializers.IntegerField(min_value=1, default=1)
    demand = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False, allow_null=True)
    zero_library = serializers.BooleanField(default=False)
    trials = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    mode = serializers.ChoiceField(choices=MODES, required=False, allow_null=True)
    colluders = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False, allow_null=True)

    def validate(self, data):
        if data.get('seed') is None:
            data['seed'] = default_seed()
        try:
            scheme = build_scheme(data)
        except PrivCacheError as exc:
            raise serializers.ValidationError({"scheme": str(exc)})
        if data.get('demand') is not None:
            try:
                scheme.check_demand(data['demand'])
            except PrivCacheError as exc:
                raise serializers.ValidationError({"demand": str(exc)})
        return data

    def build(self):
        return build_scheme(self.validated_data)


class CurveRequestSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1)
    k = serializers.IntegerField(min_value=1)
    samples = serializers.IntegerField(min_value=2, required=False)

    def validate(self, data):
        if data.get('samples') is None:
            data['samples'] = setting('PRIVCACHE_CURVE_SAMPLES', 512)
        return data


class AuditRunSerializer(serializers.ModelSerializer):
    requested_by = serializers.StringRelatedField(read_only=True)

    class Meta:
        model = AuditRun
        fields = ['id', 'kind', 'scheme', 'params', 'mode', 'seed', 'trials', 'status', 'report', 'passed',
                  'error', 'requested_by', 'created_at', 'updated_at']
        read_only_fields = ['status', 'report', 'passed', 'error', 'requested_by', 'created_at', 'updated_at']
        extra_kwargs = {'seed': {'required': False}}

    def validate_params(self, value):
        if not isinstance(value, dict):
            raise serializers.ValidationError("params must be a flat object.")
        unknown = set(value) - set(PARAM_FIELDS)
        if unknown:
            raise serializers.ValidationError(f"Unknown parameters: {', '.join(sorted(unknown))}")
        return value

    def validate(self, data):
        if data.get('seed') is None:
            data['seed'] = default_seed()
        config = RunConfigSerializer(data={
            **data.get('params', {}),
            'scheme': data.get('scheme'),
            'seed': data['seed'],
            'mode': data.get('mode') or None,
            'trials': data.get('trials'),
        })
        if not config.is_valid():
            raise serializers.ValidationError(config.errors)
        if data.get('kind') == AuditRun.Kind.Colluding and not data.get('params', {}).get('colluders'):
            raise serializers.ValidationError({"params": "A colluding audit needs colluders."})
        return data
